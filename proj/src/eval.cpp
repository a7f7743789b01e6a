#include "sdd/eval.hpp"

#include "sdd/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <ostream>
#include <thread>

#include <json.hpp>

namespace sdd {

DayStats run_episode(Policy& policy, Env& env, const RequestInstance& inst) {
  const Geography& geo = env.geography();
  const int J = geo.region_count();
  const double quarter = geo.day_length_minutes / kQuarters;
  DayStats day;
  day.acc_region.assign(J, 0);
  day.tot_region.assign(J, 0);
  day.acc_quarter.assign(kQuarters, 0);
  day.tot_quarter.assign(kQuarters, 0);
  day.acc_region_quarter.assign(static_cast<size_t>(J) * kQuarters, 0);
  day.tot_region_quarter.assign(static_cast<size_t>(J) * kQuarters, 0);
  policy.begin_day();
  env.reset(inst);
  while (!env.done()) {
    const int j = env.request().region_id - 1;
    const int q = std::min(kQuarters - 1,
                           static_cast<int>(env.time() / quarter));
    const int action = policy.act(env);
    day.reward_sum += env.step(action).reward;
    day.tot_region[j] += 1;
    day.tot_quarter[q] += 1;
    day.tot_region_quarter[j * kQuarters + q] += 1;
    if (action != 0) {
      day.acc_region[j] += 1;
      day.acc_quarter[q] += 1;
      day.acc_region_quarter[j * kQuarters + q] += 1;
    }
  }
  return day;
}

namespace {

std::vector<DayStats> run_pool(const Policy& policy, const Geography& geo,
                               int vehicle_count, const RewardParams& reward,
                               const std::vector<RequestInstance>& pool,
                               int jobs) {
  if (pool.empty()) throw config_error("evaluation needs at least one day");
  std::vector<DayStats> stats(pool.size());
  jobs = std::clamp<int>(jobs, 1, static_cast<int>(pool.size()));
  if (jobs == 1) {
    Env env(geo, vehicle_count, reward);
    std::unique_ptr<Policy> p = policy.clone();
    for (size_t i = 0; i < pool.size(); ++i)
      stats[i] = run_episode(*p, env, pool[i]);
    return stats;
  }
  std::vector<std::thread> workers;
  std::vector<std::exception_ptr> failures(jobs);
  for (int t = 0; t < jobs; ++t) {
    const size_t begin = pool.size() * t / jobs;
    const size_t end = pool.size() * (t + 1) / jobs;
    workers.emplace_back([&, t, begin, end] {
      try {
        Env env(geo, vehicle_count, reward);
        std::unique_ptr<Policy> p = policy.clone();
        for (size_t i = begin; i < end; ++i)
          stats[i] = run_episode(*p, env, pool[i]);
      } catch (...) {
        failures[t] = std::current_exception();
      }
    });
  }
  for (std::thread& w : workers) w.join();
  for (const std::exception_ptr& e : failures)
    if (e) std::rethrow_exception(e);
  return stats;
}

}  // namespace

EvalReport evaluate_pool(const Policy& policy, const Geography& geo,
                         int vehicle_count, const RewardParams& reward,
                         const std::vector<RequestInstance>& pool, int jobs) {
  const std::vector<DayStats> stats =
      run_pool(policy, geo, vehicle_count, reward, pool, jobs);
  const int J = geo.region_count();
  EvalReport rep;
  rep.policy = policy.name();
  rep.instances = static_cast<int>(pool.size());
  rep.seed_first = pool.front().seed;
  rep.seed_last = pool.back().seed;
  rep.acc_region.assign(J, 0);
  rep.tot_region.assign(J, 0);
  rep.acc_quarter.assign(kQuarters, 0);
  rep.tot_quarter.assign(kQuarters, 0);
  std::vector<long> acc_rq(static_cast<size_t>(J) * kQuarters, 0);
  std::vector<long> tot_rq(static_cast<size_t>(J) * kQuarters, 0);
  long accepted = 0, total = 0;
  for (const DayStats& day : stats) {
    for (int j = 0; j < J; ++j) {
      rep.acc_region[j] += day.acc_region[j];
      rep.tot_region[j] += day.tot_region[j];
      for (int q = 0; q < kQuarters; ++q) {
        acc_rq[j * kQuarters + q] += day.acc_region_quarter[j * kQuarters + q];
        tot_rq[j * kQuarters + q] += day.tot_region_quarter[j * kQuarters + q];
      }
    }
    for (int q = 0; q < kQuarters; ++q) {
      rep.acc_quarter[q] += day.acc_quarter[q];
      rep.tot_quarter[q] += day.tot_quarter[q];
    }
  }
  rep.r_region.assign(J, 0.0);
  rep.r_min = std::numeric_limits<double>::infinity();
  rep.r_max = -std::numeric_limits<double>::infinity();
  for (int j = 0; j < J; ++j) {
    accepted += rep.acc_region[j];
    total += rep.tot_region[j];
    rep.r_region[j] = service_rate(rep.acc_region[j], rep.tot_region[j]);
    rep.r_min = std::min(rep.r_min, rep.r_region[j]);
    rep.r_max = std::max(rep.r_max, rep.r_region[j]);
  }
  rep.utility = static_cast<double>(accepted) / rep.instances;
  rep.r_total = service_rate(accepted, total);
  for (int q = 0; q < kQuarters; ++q) {
    rep.quarter_r_total[q] = service_rate(rep.acc_quarter[q], rep.tot_quarter[q]);
    double lo = std::numeric_limits<double>::infinity();
    for (int j = 0; j < J; ++j)
      lo = std::min(lo, service_rate(acc_rq[j * kQuarters + q],
                                     tot_rq[j * kQuarters + q]));
    rep.quarter_r_min[q] = lo;
  }
  return rep;
}

EvalReport evaluate(const Policy& policy, const Geography& geo,
                    int vehicle_count, const RewardParams& reward,
                    const std::vector<std::uint64_t>& seeds, int jobs) {
  std::vector<RequestInstance> pool;
  pool.reserve(seeds.size());
  for (std::uint64_t s : seeds) pool.push_back(sample_instance(geo, s));
  return evaluate_pool(policy, geo, vehicle_count, reward, pool, jobs);
}

std::string eval_report_json(const EvalReport& rep) {
  nlohmann::json j;
  j["schema"] = 1;
  j["policy"] = rep.policy;
  j["instances"] = rep.instances;
  j["seed_first"] = rep.seed_first;
  j["seed_last"] = rep.seed_last;
  j["utility"] = rep.utility;
  j["r_total"] = rep.r_total;
  j["r_region"] = rep.r_region;
  j["r_min"] = rep.r_min;
  j["r_max"] = rep.r_max;
  j["quarter_r_total"] =
      std::vector<double>(rep.quarter_r_total, rep.quarter_r_total + kQuarters);
  j["quarter_r_min"] =
      std::vector<double>(rep.quarter_r_min, rep.quarter_r_min + kQuarters);
  j["accepted_region"] = rep.acc_region;
  j["total_region"] = rep.tot_region;
  j["accepted_quarter"] = rep.acc_quarter;
  j["total_quarter"] = rep.tot_quarter;
  return j.dump(2) + "\n";
}

void write_eval_report_csv(const EvalReport& rep, std::ostream& out) {
  const int J = static_cast<int>(rep.r_region.size());
  out << "policy,instances,utility,r_total,r_min,r_max";
  for (int j = 1; j <= J; ++j) out << ",r_" << j;
  for (int q = 1; q <= kQuarters; ++q) out << ",q" << q << "_r_total";
  for (int q = 1; q <= kQuarters; ++q) out << ",q" << q << "_r_min";
  out << "\n";
  char buf[64];
  out << rep.policy << ',' << rep.instances;
  std::snprintf(buf, sizeof(buf), ",%.6f", rep.utility);
  out << buf;
  std::snprintf(buf, sizeof(buf), ",%.6f,%.6f,%.6f", rep.r_total, rep.r_min,
                rep.r_max);
  out << buf;
  for (int j = 0; j < J; ++j) {
    std::snprintf(buf, sizeof(buf), ",%.6f", rep.r_region[j]);
    out << buf;
  }
  for (int q = 0; q < kQuarters; ++q) {
    std::snprintf(buf, sizeof(buf), ",%.6f", rep.quarter_r_total[q]);
    out << buf;
  }
  for (int q = 0; q < kQuarters; ++q) {
    std::snprintf(buf, sizeof(buf), ",%.6f", rep.quarter_r_min[q]);
    out << buf;
  }
  out << "\n";
}

std::vector<ParetoRow> pareto_sweep(const std::vector<ParetoInput>& inputs,
                                    const Geography& geo, int vehicle_count,
                                    const std::vector<std::uint64_t>& seeds,
                                    int jobs) {
  if (inputs.empty()) throw config_error("pareto sweep needs inputs");
  std::vector<RequestInstance> pool;
  pool.reserve(seeds.size());
  for (std::uint64_t s : seeds) pool.push_back(sample_instance(geo, s));
  std::vector<ParetoRow> rows;
  for (const ParetoInput& in : inputs) {
    if (in.policies.empty())
      throw config_error("pareto sweep: an alpha has no policies");
    RewardParams reward;
    reward.mode = RewardMode::rate_based;
    reward.alpha = in.alpha;
    ParetoRow row;
    row.alpha = in.alpha;
    for (const Policy* p : in.policies) {
      const EvalReport rep =
          evaluate_pool(*p, geo, vehicle_count, reward, pool, jobs);
      row.r_total += rep.r_total;
      row.r_min += rep.r_min;
      row.utility += rep.utility;
    }
    const double n = static_cast<double>(in.policies.size());
    row.r_total /= n;
    row.r_min /= n;
    row.utility /= n;
    rows.push_back(row);
  }
  for (size_t i = 0; i < rows.size(); ++i)
    for (size_t j = 0; j < rows.size(); ++j) {
      if (i == j) continue;
      const bool weakly = rows[j].r_total >= rows[i].r_total &&
                          rows[j].r_min >= rows[i].r_min;
      const bool strictly = rows[j].r_total > rows[i].r_total ||
                            rows[j].r_min > rows[i].r_min;
      if (weakly && strictly) {
        rows[i].dominated = true;
        break;
      }
    }
  return rows;
}

void write_pareto_csv(const std::vector<ParetoRow>& rows, std::ostream& out) {
  out << "alpha,r_total,r_min,utility,dominated\n";
  char buf[96];
  for (const ParetoRow& row : rows) {
    std::snprintf(buf, sizeof(buf), "%.3f,%.6f,%.6f,%.6f,%d\n", row.alpha,
                  row.r_total, row.r_min, row.utility, row.dominated ? 1 : 0);
    out << buf;
  }
}

std::vector<ProfileBin> reward_profile(const Policy& policy,
                                       const Geography& geo, int vehicle_count,
                                       double alpha,
                                       const std::vector<std::uint64_t>& seeds) {
  if (seeds.empty()) throw config_error("reward profile needs seeds");
  const int bins = static_cast<int>(std::ceil(geo.request_cutoff_minutes));
  std::vector<double> sum(bins, 0.0), sum_abs(bins, 0.0);
  std::vector<long> count(bins, 0);
  RewardParams reward;
  reward.mode = RewardMode::rate_based;
  reward.alpha = alpha;
  Env env(geo, vehicle_count, reward);
  std::unique_ptr<Policy> p = policy.clone();
  for (std::uint64_t s : seeds) {
    const RequestInstance inst = sample_instance(geo, s);
    p->begin_day();
    env.reset(inst);
    while (!env.done()) {
      const int minute =
          std::min(bins - 1, static_cast<int>(env.time()));
      const double r = env.step(p->act(env)).reward;
      sum[minute] += r;
      sum_abs[minute] += std::abs(r);
      count[minute] += 1;
    }
  }
  std::vector<ProfileBin> out(bins);
  const double days = static_cast<double>(seeds.size());
  for (int b = 0; b < bins; ++b) {
    out[b].minute = b;
    out[b].mean_reward = sum[b] / days;
    out[b].mean_abs_reward = sum_abs[b] / days;
    out[b].count = count[b];
  }
  return out;
}

void write_profile_csv(const std::vector<ProfileBin>& bins, std::ostream& out) {
  out << "minute,mean_reward,mean_abs_reward,count\n";
  char buf[96];
  for (const ProfileBin& bin : bins) {
    std::snprintf(buf, sizeof(buf), "%d,%.9g,%.9g,%ld\n", bin.minute,
                  bin.mean_reward, bin.mean_abs_reward, bin.count);
    out << buf;
  }
}

LongTermResult long_term(const Policy& policy, const Geography& geo,
                         int vehicle_count, const RewardParams& reward,
                         const LongTermConfig& cfg) {
  if (cfg.months < 1 || cfg.days_per_month < 1)
    throw config_error("long-term horizon must be positive");
  if (cfg.r_threshold <= 0.0 || cfg.r_threshold >= 1.0)
    throw config_error("long-term threshold must lie in (0, 1)");
  Geography current = geo;
  rng::Engine eng(cfg.seed);
  std::unique_ptr<Policy> p = policy.clone();
  LongTermResult result;
  const int J = geo.region_count();
  for (int month = 0; month < cfg.months; ++month) {
    MonthStats stats;
    stats.lambda.resize(J);
    for (int j = 0; j < J; ++j) stats.lambda[j] = current.regions[j].arrival_rate;
    stats.acc_region.assign(J, 0);
    stats.tot_region.assign(J, 0);
    Env env(current, vehicle_count, reward);
    long accepted = 0;
    for (int d = 0; d < cfg.days_per_month; ++d) {
      const RequestInstance inst = sample_instance(current, eng());
      const DayStats day = run_episode(*p, env, inst);
      for (int j = 0; j < J; ++j) {
        stats.acc_region[j] += day.acc_region[j];
        stats.tot_region[j] += day.tot_region[j];
        accepted += day.acc_region[j];
      }
    }
    stats.r_region.assign(J, 0.0);
    for (int j = 0; j < J; ++j)
      stats.r_region[j] = service_rate(stats.acc_region[j], stats.tot_region[j]);
    stats.mean_accepted_per_day =
        static_cast<double>(accepted) / cfg.days_per_month;
    // Demand reacts to the observed service level; a silent region gives no
    // signal and keeps its rate.
    for (int j = 0; j < J; ++j) {
      if (stats.tot_region[j] <= 0) continue;
      const double next = current.regions[j].arrival_rate *
                          (1.0 + stats.r_region[j] - cfg.r_threshold);
      current.regions[j].arrival_rate = std::max(0.0, next);
    }
    result.months.push_back(std::move(stats));
  }
  return result;
}

void write_long_term_csv(const LongTermResult& result, std::ostream& out) {
  if (result.months.empty()) return;
  const int J = static_cast<int>(result.months.front().lambda.size());
  out << "month";
  for (int j = 1; j <= J; ++j) out << ",lambda_" << j;
  for (int j = 1; j <= J; ++j) out << ",accepted_" << j;
  for (int j = 1; j <= J; ++j) out << ",total_" << j;
  for (int j = 1; j <= J; ++j) out << ",rate_" << j;
  out << ",mean_accepted_per_day\n";
  char buf[64];
  for (size_t m = 0; m < result.months.size(); ++m) {
    const MonthStats& stats = result.months[m];
    out << m + 1;
    for (int j = 0; j < J; ++j) {
      std::snprintf(buf, sizeof(buf), ",%.6f", stats.lambda[j]);
      out << buf;
    }
    for (int j = 0; j < J; ++j) out << ',' << stats.acc_region[j];
    for (int j = 0; j < J; ++j) out << ',' << stats.tot_region[j];
    for (int j = 0; j < J; ++j) {
      std::snprintf(buf, sizeof(buf), ",%.6f", stats.r_region[j]);
      out << buf;
    }
    std::snprintf(buf, sizeof(buf), ",%.6f\n", stats.mean_accepted_per_day);
    out << buf;
  }
}

}  // namespace sdd
