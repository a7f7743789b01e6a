#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "sdd/policy.hpp"

namespace sdd {

inline constexpr int kQuarters = 4;

// Per-day raw counts; everything downstream is pooled from these. The
// region-by-quarter table is flattened as [region * kQuarters + quarter].
struct DayStats {
  std::vector<long> acc_region;  // accepted per region
  std::vector<long> tot_region;
  std::vector<long> acc_quarter;  // accepted per day quarter
  std::vector<long> tot_quarter;
  std::vector<long> acc_region_quarter;
  std::vector<long> tot_region_quarter;
  double reward_sum = 0.0;
};

// Rolls one day; the env keeps its reward parameters.
DayStats run_episode(Policy& policy, Env& env, const RequestInstance& inst);

struct EvalReport {
  std::string policy;
  int instances = 0;
  std::uint64_t seed_first = 0, seed_last = 0;
  double utility = 0.0;  // mean accepted per day
  double r_total = 0.0;
  std::vector<double> r_region;
  double r_min = 0.0, r_max = 0.0;
  double quarter_r_total[kQuarters] = {};
  double quarter_r_min[kQuarters] = {};
  // Pooled raw counts, kept so rates can be re-audited.
  std::vector<long> acc_region, tot_region;
  std::vector<long> acc_quarter, tot_quarter;
};

// Pooled rates over an instance pool; days can run on `jobs` threads, the
// reduction order is fixed so results do not depend on the thread count.
EvalReport evaluate_pool(const Policy& policy, const Geography& geo,
                         int vehicle_count, const RewardParams& reward,
                         const std::vector<RequestInstance>& pool,
                         int jobs = 1);

// Regenerates one instance per seed, then pools as above.
EvalReport evaluate(const Policy& policy, const Geography& geo,
                    int vehicle_count, const RewardParams& reward,
                    const std::vector<std::uint64_t>& seeds, int jobs = 1);

std::string eval_report_json(const EvalReport& report);
void write_eval_report_csv(const EvalReport& report, std::ostream& out);

struct ParetoInput {
  double alpha = 0.0;
  std::vector<const Policy*> policies;  // typically the last ten checkpoints
};

struct ParetoRow {
  double alpha = 0.0;
  double r_total = 0.0;
  double r_min = 0.0;
  double utility = 0.0;
  bool dominated = false;
};

// One row per alpha: metrics averaged over that alpha's policies, each
// evaluated on the full seed set. A row is dominated when another row is at
// least as good in both rates and better in one.
std::vector<ParetoRow> pareto_sweep(const std::vector<ParetoInput>& inputs,
                                    const Geography& geo, int vehicle_count,
                                    const std::vector<std::uint64_t>& seeds,
                                    int jobs = 1);

// alpha,r_total,r_min,utility,dominated
void write_pareto_csv(const std::vector<ParetoRow>& rows, std::ostream& out);

struct ProfileBin {
  int minute = 0;
  double mean_reward = 0.0;  // summed per day, averaged over days
  double mean_abs_reward = 0.0;
  long count = 0;  // requests landing in this minute across all days
};

// Distribution of the rate-based combined reward over the request minute:
// runs the policy with rate-based rewards at `alpha` and bins step rewards
// by the request's arrival minute.
std::vector<ProfileBin> reward_profile(const Policy& policy,
                                       const Geography& geo, int vehicle_count,
                                       double alpha,
                                       const std::vector<std::uint64_t>& seeds);

// minute,mean_reward,mean_abs_reward,count
void write_profile_csv(const std::vector<ProfileBin>& bins, std::ostream& out);

struct LongTermConfig {
  int months = 12;
  int days_per_month = 30;
  double r_threshold = 0.70;
  std::uint64_t seed = 1;
};

struct MonthStats {
  std::vector<double> lambda;  // arrival rates the month ran with
  std::vector<long> acc_region, tot_region;
  std::vector<double> r_region;
  double mean_accepted_per_day = 0.0;
};

struct LongTermResult {
  std::vector<MonthStats> months;
};

// Demand feedback over a year: after each month every region's arrival rate
// moves by its service-rate surplus over the threshold,
// lambda <- max(0, lambda * (1 + r - threshold)). Regions that saw no
// requests keep their rate (no evidence to move on).
LongTermResult long_term(const Policy& policy, const Geography& geo,
                         int vehicle_count, const RewardParams& reward,
                         const LongTermConfig& cfg);

// month,lambda_1..J,accepted_1..J,total_1..J,rate_1..J,mean_accepted_per_day
void write_long_term_csv(const LongTermResult& result, std::ostream& out);

}  // namespace sdd
