#pragma once

#include <iosfwd>
#include <vector>

#include "sdd/routing.hpp"
#include "sdd/types.hpp"
#include "sdd/world.hpp"

namespace sdd {

enum class RewardMode { rate_based, modified, priority };

RewardMode reward_mode_from_string(const std::string& s);
std::string to_string(RewardMode mode);

struct RewardParams {
  RewardMode mode = RewardMode::modified;
  double alpha = 0.5;       // fairness weight, 0 = utility only
  VecXd priorities;         // per-region reward, priority mode only

  void validate(int region_count) const;
};

// acc/tot with the 0/0 := 0 convention used across all service rates.
inline double service_rate(long acc, long tot) {
  return tot > 0 ? static_cast<double>(acc) / static_cast<double>(tot) : 0.0;
}

// Change of the overall service rate caused by decision k (1-based);
// `accepted_before` counts accepts among the first k-1 requests.
double reward_rate_total(int k, bool accept, long accepted_before);

// Change of the minimal regional service rate caused by decision k. `acc`
// and `tot` are the per-region counters before the decision, `region` is the
// current request's 1-based region.
double reward_rate_min(bool accept, int region, const std::vector<long>& acc,
                       const std::vector<long>& tot);

// 1-based region with the lowest accepted/expected ratio; ties go to the
// lowest id, regions with non-positive expectation are skipped.
int argmin_service_rate(const std::vector<long>& acc, const VecXd& expected);

// Fixed-denominator reward: accepting pays 1-alpha, plus alpha * n / n_z
// when the request comes from the currently worst-served region z.
double reward_modified(bool accept, int region, int z_min,
                       const VecXd& expected, double alpha);

double reward_priority(bool accept, int region, const VecXd& priorities);

struct DecisionRecord {
  int k = 0;
  double time_minutes = 0.0;
  int region = 0;
  int action = 0;  // 0 reject, m = vehicle
  double reward = 0.0;
  std::vector<long> psi_accept;  // counters after the decision
  std::vector<long> psi_total;
};

struct StepResult {
  double reward = 0.0;
  bool done = false;
};

// One day of sequential accept/assign decisions. Call reset() with the day's
// requests, then step() once per request with action 0 (reject) or 1..M
// (assign to that vehicle). Rejecting is always allowed; assigning to a
// vehicle without a feasible slot is a contract violation.
class Env {
 public:
  Env(Geography geo, int vehicle_count, RewardParams reward);

  void reset(const RequestInstance& inst);
  StepResult step(int action);

  bool done() const { return cursor_ >= static_cast<int>(requests_.size()); }
  int k() const { return cursor_ + 1; }  // 1-based decision index
  double time() const;                   // t_k
  const Request& request() const;        // c_k
  const FleetState& fleet() const { return fleet_; }
  const std::vector<long>& psi_accept() const { return psi_accept_; }
  const std::vector<long>& psi_total() const { return psi_total_; }
  const std::vector<InsertionResult>& feasible() const;
  bool any_feasible() const;

  const Geography& geography() const { return geo_; }
  int vehicle_count() const { return vehicle_count_; }
  const RewardParams& reward_params() const { return reward_; }
  const VecXd& expected_counts() const { return expected_; }

  long accepted_count() const;
  long total_count() const { return static_cast<long>(requests_.size()); }

  // Decision recording is off by default; training loops skip the bookkeeping.
  void record_decisions(bool on) { recording_ = on; }
  const std::vector<DecisionRecord>& decisions() const { return records_; }

 private:
  Geography geo_;
  int vehicle_count_ = 0;
  RewardParams reward_;
  VecXd expected_;

  std::vector<Request> requests_;
  FleetState fleet_;
  std::vector<long> psi_accept_;
  std::vector<long> psi_total_;
  int cursor_ = 0;
  std::vector<InsertionResult> feasible_;
  bool recording_ = false;
  std::vector<DecisionRecord> records_;

  double reward_for(int action) const;
};

// k,time_min,region,action,vehicle,reward,psi_accept_1..J,psi_total_1..J
void write_decision_log(const std::vector<DecisionRecord>& records,
                        int region_count, std::ostream& out);

}  // namespace sdd
