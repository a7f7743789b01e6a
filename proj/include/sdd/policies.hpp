#pragma once

#include <memory>
#include <vector>

#include "sdd/policy.hpp"

namespace sdd {

// Cheapest feasible vehicle (duration increase, ties to the lower index),
// or -1 when no vehicle fits.
int cheapest_vehicle(const std::vector<InsertionResult>& slots);

// Accept whenever any vehicle fits.
class MyopicPolicy : public Policy {
 public:
  int act(const Env& env) override;
  std::string name() const override { return "myopic"; }
  std::unique_ptr<Policy> clone() const override {
    return std::make_unique<MyopicPolicy>(*this);
  }
};

class RejectAllPolicy : public Policy {
 public:
  int act(const Env&) override { return 0; }
  std::string name() const override { return "reject"; }
  std::unique_ptr<Policy> clone() const override {
    return std::make_unique<RejectAllPolicy>(*this);
  }
};

// Accept only requests from regions whose service rate is still below
// kappa; the first `warmup` minutes accept everything feasible while the
// rates are too noisy to act on.
class BucketPolicy : public Policy {
 public:
  explicit BucketPolicy(double kappa, double warmup_minutes = 30.0);
  int act(const Env& env) override;
  std::string name() const override;
  std::unique_ptr<Policy> clone() const override {
    return std::make_unique<BucketPolicy>(*this);
  }
  double kappa() const { return kappa_; }

 private:
  double kappa_ = 0.0;
  double warmup_ = 30.0;
};

// Splits the fleet by region: vehicles 1..kappa_r serve Region 1, the rest
// serve Region 2. Only defined for two regions.
class ReservedPolicy : public Policy {
 public:
  ReservedPolicy(int kappa_r, int vehicle_count);
  int act(const Env& env) override;
  std::string name() const override;
  std::unique_ptr<Policy> clone() const override {
    return std::make_unique<ReservedPolicy>(*this);
  }
  int kappa_r() const { return kappa_r_; }

 private:
  int kappa_r_ = 0;
  int vehicle_count_ = 0;
};

struct BucketSearchResult {
  double kappa = 0.0;
  double r_min = 0.0;
  double r_total = 0.0;
  int evaluated = 0;  // grid points tried
};

// Tunes BucketPolicy's kappa on a validation pool: walk the grid
// 0.05, 0.06, ... and keep the pooled minimal regional rate; stop after
// three grid points in a row fail to improve it.
BucketSearchResult bucket_search(const Geography& geo, int vehicle_count,
                                 const RewardParams& reward,
                                 const std::vector<RequestInstance>& validation);

}  // namespace sdd
