#include "sdd/policies.hpp"

#include <cmath>
#include <cstdio>

#include "sdd/eval.hpp"

namespace sdd {

int cheapest_vehicle(const std::vector<InsertionResult>& slots) {
  int best = -1;
  for (int m = 0; m < static_cast<int>(slots.size()); ++m) {
    if (!slots[m].feasible) continue;
    if (best < 0 || slots[m].delta < slots[best].delta) best = m;
  }
  return best;
}

int MyopicPolicy::act(const Env& env) {
  const int m = cheapest_vehicle(env.feasible());
  return m < 0 ? 0 : m + 1;
}

BucketPolicy::BucketPolicy(double kappa, double warmup_minutes)
    : kappa_(kappa), warmup_(warmup_minutes) {
  if (kappa < 0.0 || kappa > 1.0)
    throw config_error("bucket kappa must lie in [0, 1]");
  if (warmup_minutes < 0.0)
    throw config_error("bucket warmup must be non-negative");
}

int BucketPolicy::act(const Env& env) {
  const int m = cheapest_vehicle(env.feasible());
  if (m < 0) return 0;
  if (env.time() >= warmup_) {
    const int j = env.request().region_id - 1;
    const double rate = service_rate(env.psi_accept()[j], env.psi_total()[j]);
    if (rate >= kappa_) return 0;
  }
  return m + 1;
}

std::string BucketPolicy::name() const {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "bucket:%.2f", kappa_);
  return buf;
}

ReservedPolicy::ReservedPolicy(int kappa_r, int vehicle_count)
    : kappa_r_(kappa_r), vehicle_count_(vehicle_count) {
  if (vehicle_count < 2)
    throw config_error("reserved policy needs at least two vehicles");
  if (kappa_r < 1 || kappa_r > vehicle_count - 1)
    throw config_error("reserved kappa_r must lie in [1, vehicles - 1]");
}

int ReservedPolicy::act(const Env& env) {
  if (env.geography().region_count() != 2)
    throw contract_error("reserved policy is defined for two regions only");
  if (env.vehicle_count() != vehicle_count_)
    throw contract_error("reserved policy built for a different fleet size");
  const std::vector<InsertionResult>& slots = env.feasible();
  const bool region1 = env.request().region_id == 1;
  const int lo = region1 ? 0 : kappa_r_;
  const int hi = region1 ? kappa_r_ : vehicle_count_;
  int best = -1;
  for (int m = lo; m < hi; ++m) {
    if (!slots[m].feasible) continue;
    if (best < 0 || slots[m].delta < slots[best].delta) best = m;
  }
  return best < 0 ? 0 : best + 1;
}

std::string ReservedPolicy::name() const {
  return "reserved:" + std::to_string(kappa_r_);
}

BucketSearchResult bucket_search(const Geography& geo, int vehicle_count,
                                 const RewardParams& reward,
                                 const std::vector<RequestInstance>& validation) {
  if (validation.empty())
    throw config_error("bucket search needs a validation pool");
  BucketSearchResult best;
  best.r_min = -1.0;
  int stale = 0;
  for (int grid = 5; grid <= 100; ++grid) {
    BucketPolicy policy(grid / 100.0);
    const EvalReport rep =
        evaluate_pool(policy, geo, vehicle_count, reward, validation);
    ++best.evaluated;
    if (rep.r_min > best.r_min) {
      best.r_min = rep.r_min;
      best.r_total = rep.r_total;
      best.kappa = policy.kappa();
      stale = 0;
    } else if (++stale >= 3) {
      break;
    }
  }
  return best;
}

}  // namespace sdd
