// Acceptance gate for the dispatch toolkit. Each numbered check prints one
// PASS/FAIL line on stdout with its measured numbers; progress chatter goes
// to stderr. The exit code is nonzero when any check fails.
//
// Trained runs land under <root> (argv[1], default "acceptance_runs") and are
// reused on reruns when the stored config matches, so only the first
// invocation pays for training.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "oracle.hpp"
#include "sdd/commands.hpp"
#include "sdd/dqn.hpp"
#include "sdd/eval.hpp"
#include "sdd/policies.hpp"
#include "sdd/rng.hpp"

namespace fs = std::filesystem;
using namespace sdd;

namespace {

int g_failed = 0;

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
  }
};

void verdict(int id, const char* what, bool pass, const std::string& detail) {
  if (!pass) ++g_failed;
  std::printf("%s  criterion %2d  %s (%s)\n", pass ? "PASS" : "FAIL", id, what,
              detail.c_str());
  std::fflush(stdout);
}

void note(const std::string& text) {
  std::fprintf(stderr, "  .. %s\n", text.c_str());
  std::fflush(stderr);
}

std::string fmt(const char* spec, ...) {
  char buf[512];
  va_list args;
  va_start(args, spec);
  std::vsnprintf(buf, sizeof(buf), spec, args);
  va_end(args);
  return buf;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return {};
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<RequestInstance> make_pool(const Geography& geo,
                                       const std::vector<std::uint64_t>& seeds) {
  std::vector<RequestInstance> pool;
  pool.reserve(seeds.size());
  for (std::uint64_t s : seeds) pool.push_back(sample_instance(geo, s));
  return pool;
}

// ---- shared small-scale experiment setup ------------------------------

std::string g_root = "acceptance_runs";

RunConfig desk_run(double alpha, int vehicles, const std::string& name) {
  RunConfig cfg = RunConfig::defaults("desk");
  cfg.reward.alpha = alpha;
  cfg.vehicles = vehicles;
  cfg.out = g_root + "/" + name;
  return cfg;
}

// Train into cfg.out unless a finished run with the same resolved config is
// already sitting there.
void ensure_run(const RunConfig& cfg) {
  if (fs::exists(cfg.out + "/train_summary.json") &&
      slurp(cfg.out + "/config.json") == cfg.to_json()) {
    note("reusing " + cfg.out);
    return;
  }
  fs::remove_all(cfg.out);
  note("training " + cfg.out + " ...");
  Timer t;
  cmd_train(cfg);
  note(fmt("trained %s in %.0f s", cfg.out.c_str(), t.seconds()));
}

struct RunMetrics {
  double r1 = 0.0, r2 = 0.0, r_total = 0.0, r_min = 0.0, utility = 0.0;
};

// Test-pool rates averaged over the retained (last ten) checkpoints.
RunMetrics checkpoint_mean(const std::string& run_dir, const Geography& geo,
                           int vehicles, const RewardParams& reward,
                           const std::vector<RequestInstance>& test) {
  const auto policies = load_checkpoint_policies(run_dir);
  RunMetrics m;
  for (const auto& p : policies) {
    const EvalReport rep = evaluate_pool(*p, geo, vehicles, reward, test);
    m.r1 += rep.r_region[0];
    m.r2 += rep.r_region[1];
    m.r_total += rep.r_total;
    m.r_min += rep.r_min;
    m.utility += rep.utility;
  }
  const double n = static_cast<double>(policies.size());
  m.r1 /= n;
  m.r2 /= n;
  m.r_total /= n;
  m.r_min /= n;
  m.utility /= n;
  return m;
}

// ---- criterion 1: insertion logic vs exhaustive enumeration ------------

bool check_routing(std::string& detail) {
  Timer t;
  const Geography geo = builtin_geography(GeographyKind::dens);
  rng::Engine eng(4242);
  int feasible_seen = 0, infeasible_seen = 0;
  for (int c = 0; c < 500; ++c) {
    const int vehicles = 1 + static_cast<int>(rng::uniform_index(eng, 2));
    FleetState fleet(vehicles);
    int budget = 6;  // pending customers across the whole fleet
    for (int m = 0; m < vehicles; ++m) {
      PlannedRoute& route = fleet.vehicles[m].planned;
      route.available_from = rng::uniform(eng, 0.0, 200.0);
      const int n = static_cast<int>(rng::uniform_index(eng, budget + 1));
      budget -= n;
      for (int i = 0; i < n; ++i) {
        Stop stop;
        stop.request_index = 100 + 10 * m + i;
        stop.location =
            Vec2(rng::uniform(eng, -10.0, 10.0), rng::uniform(eng, -10.0, 10.0));
        stop.deadline_minutes = rng::uniform(eng, 30.0, geo.day_length_minutes);
        route.stops.push_back(stop);
      }
      route.departure =
          route.stops.empty() ? kNoDeparture : latest_departure(route.stops, geo);
    }
    Request req;
    req.index = 1;
    req.time_minutes = rng::uniform(eng, 0.0, geo.request_cutoff_minutes);
    req.location =
        Vec2(rng::uniform(eng, -10.0, 10.0), rng::uniform(eng, -10.0, 10.0));
    req.region_id = 1;
    req.deadline_minutes = req.time_minutes + geo.deadline_minutes;
    const double now = req.time_minutes;

    for (int m = 0; m < vehicles; ++m) {
      const InsertionResult got =
          cheapest_insertion(fleet.vehicles[m].planned, req, geo, now);
      const oracle::Slot want =
          oracle::scan_route(fleet.vehicles[m].planned, req, geo, now);
      if (got.feasible != want.feasible ||
          (want.feasible &&
           (got.position != want.position || got.delta != want.delta ||
            got.departure != want.departure))) {
        detail = fmt("case %d vehicle %d disagrees with enumeration", c, m);
        return false;
      }
    }

    const oracle::FleetSlot want = oracle::scan_fleet(fleet, req, geo, now);
    const int pick = cheapest_vehicle(feasibility_vector(fleet, req, geo, now));
    if (want.feasible != (pick >= 0)) {
      detail = fmt("case %d fleet feasibility disagrees", c);
      return false;
    }
    if (want.feasible) {
      ++feasible_seen;
      FleetState work = fleet;
      const InsertionResult done = assign(work, pick, req, geo, now);
      if (pick != want.vehicle || done.position != want.slot.position ||
          done.delta != want.slot.delta ||
          done.departure != want.slot.departure) {
        detail = fmt("case %d assignment disagrees with enumeration", c);
        return false;
      }
    } else {
      ++infeasible_seen;
      FleetState work = fleet;
      bool threw = false;
      try {
        assign(work, 0, req, geo, now);
      } catch (const contract_error&) {
        threw = true;
      }
      if (!threw) {
        detail = fmt("case %d infeasible assign did not throw", c);
        return false;
      }
    }
  }
  detail = fmt("500 cases exact, %d feasible / %d infeasible, %.1f s",
               feasible_seen, infeasible_seen, t.seconds());
  return feasible_seen > 50 && infeasible_seen > 10 && t.seconds() < 60.0;
}

// ---- criterion 2: per-step rate rewards telescope to the day totals -----

bool check_telescoping(std::string& detail) {
  const Geography geo = builtin_geography(GeographyKind::dens);
  RewardParams reward;
  reward.mode = RewardMode::rate_based;
  Env env(geo, 3, reward);
  MyopicPolicy myopic;
  double worst_total = 0.0, worst_min = 0.0;
  for (int d = 0; d < 100; ++d) {
    double sum_total = 0.0, sum_min = 0.0;
    myopic.begin_day();
    env.reset(sample_instance(geo, 7000 + d));
    while (!env.done()) {
      const int action = myopic.act(env);
      const std::vector<long>& acc = env.psi_accept();
      const std::vector<long>& tot = env.psi_total();
      long accepted_before = 0;
      for (long a : acc) accepted_before += a;
      sum_total += reward_rate_total(env.k(), action > 0, accepted_before);
      sum_min += reward_rate_min(action > 0, env.request().region_id, acc, tot);
      env.step(action);
    }
    long acc_all = 0, tot_all = 0;
    double r_min = std::numeric_limits<double>::infinity();
    for (size_t j = 0; j < env.psi_total().size(); ++j) {
      acc_all += env.psi_accept()[j];
      tot_all += env.psi_total()[j];
      r_min = std::min(r_min, service_rate(env.psi_accept()[j], env.psi_total()[j]));
    }
    worst_total = std::max(worst_total,
                           std::abs(sum_total - service_rate(acc_all, tot_all)));
    worst_min = std::max(worst_min, std::abs(sum_min - r_min));
  }
  detail = fmt("100 days, max |sum - final| = %.2e (total) / %.2e (min)",
               worst_total, worst_min);
  return worst_total <= 1e-9 && worst_min <= 1e-9;
}

// ---- criterion 3: fixed-denominator reward decomposition ----------------

bool check_modified_reward(std::string& detail) {
  const Geography geo = desk_run(0.0, 1, "unused").geography.build();
  MyopicPolicy myopic;
  for (double alpha : {0.0, 0.3, 0.7, 1.0}) {
    RewardParams reward;
    reward.mode = RewardMode::modified;
    reward.alpha = alpha;
    Env env(geo, 1, reward);
    for (int d = 0; d < 100; ++d) {
      double sum = 0.0;
      myopic.begin_day();
      env.reset(sample_instance(geo, 7100 + d));
      while (!env.done()) {
        const double r = env.step(myopic.act(env)).reward;
        if (r < 0.0) {
          detail = fmt("alpha=%.1f day %d produced a negative step reward %.3g",
                       alpha, d, r);
          return false;
        }
        sum += r;
      }
      if (alpha == 0.0 && sum != static_cast<double>(env.accepted_count())) {
        detail = fmt("alpha=0 day %d: reward sum %.17g != %ld accepts", d, sum,
                     env.accepted_count());
        return false;
      }
    }
  }
  detail = "alpha=0 sums are exact accept counts; steps stay >= 0 for alpha in {0,0.3,0.7,1}";
  return true;
}

// ---- criterion 4: the documented two-region worked example --------------

bool check_worked_example(std::string& detail) {
  const std::vector<long> acc = {1, 4}, tot = {1, 5};
  const double on_accept = 0.5 * reward_rate_total(7, true, 5) +
                           0.5 * reward_rate_min(true, 1, acc, tot);
  const double on_reject = 0.5 * reward_rate_total(7, false, 5) +
                           0.5 * reward_rate_min(false, 1, acc, tot);
  const double lift = reward_rate_min(true, 1, {3, 4}, {5, 5});
  detail = fmt("accept %.5f (want 0.01190), reject %.5f (want -0.20952), "
               "min-rate lift %.4f (want 0.0667)",
               on_accept, on_reject, lift);
  return std::abs(on_accept - 0.01190) <= 1e-4 &&
         std::abs(on_reject - -0.20952) <= 1e-4 &&
         std::abs(lift - 0.0667) <= 1e-4;
}

// ---- criterion 5: rate rewards decay to noise by the late day -----------

bool check_reward_decay(std::string& detail) {
  Timer t;
  const Geography geo = desk_run(0.5, 1, "unused").geography.build();
  MyopicPolicy myopic;
  const std::vector<ProfileBin> bins =
      reward_profile(myopic, geo, 1, 0.5, seed_block(20000, 500));
  double early = 0.0, late = 0.0;
  for (int b = 0; b < 30; ++b) early += bins[b].mean_abs_reward;
  early /= 30.0;
  for (int b = 360; b < 420; ++b) late += bins[b].mean_abs_reward;
  late /= 60.0;
  detail = fmt("mean |reward| %.5f first half hour vs %.5f final hour, %.1f s",
               early, late, t.seconds());
  return late < 0.10 * early && t.seconds() < 300.0;
}

// ---- criterion 6: analytic gradients vs central differences -------------

bool check_gradients(std::string& detail) {
  rng::Engine eng(99);
  double worst = 0.0;
  for (int c = 0; c < 100; ++c) {
    std::vector<int> sizes;
    sizes.push_back(2 + static_cast<int>(rng::uniform_index(eng, 6)));
    const int hidden = 1 + static_cast<int>(rng::uniform_index(eng, 2));
    for (int l = 0; l < hidden; ++l)
      sizes.push_back(2 + static_cast<int>(rng::uniform_index(eng, 8)));
    sizes.push_back(1 + static_cast<int>(rng::uniform_index(eng, 4)));
    Mlp<double> net(sizes, 1000 + c);
    worst = std::max(worst, net.gradient_check(5000 + c, 1e-5, 0.5));
  }
  detail = fmt("max relative error %.2e over 100 nets", worst);
  return worst < 1e-4;
}

// ---- criterion 7: learned fairness effect at small scale ----------------

bool check_fairness(const RunConfig& run0, const RunConfig& run5,
                    const Geography& geo,
                    const std::vector<RequestInstance>& test,
                    std::string& detail) {
  Timer t;
  ensure_run(run0);
  ensure_run(run5);
  const RunMetrics m0 = checkpoint_mean(run0.out, geo, 1, run0.reward, test);
  const RunMetrics m5 = checkpoint_mean(run5.out, geo, 1, run5.reward, test);
  const double gap0 = m0.r2 - m0.r1;
  const double gap5 = m5.r2 - m5.r1;
  detail = fmt("alpha=0 rates %.3f/%.3f (gap %.3f), alpha=0.5 rates %.3f/%.3f "
               "(gap %.3f), utility %.1f -> %.1f, %.0f s",
               m0.r1, m0.r2, gap0, m5.r1, m5.r2, gap5, m0.utility, m5.utility,
               t.seconds());
  return gap0 >= 0.15 && std::abs(gap5) <= 0.5 * gap0 &&
         m5.utility >= 0.85 * m0.utility && t.seconds() < 1800.0;
}

// ---- criterion 8: learned policy beats the tuned benchmarks -------------

bool check_benchmarks(const Geography& geo,
                      const std::vector<RequestInstance>& validation,
                      const std::vector<RequestInstance>& test,
                      std::string& detail) {
  const RunConfig run = desk_run(0.5, 2, "t3_m2_alpha05");
  ensure_run(run);
  RewardParams reward;
  reward.mode = RewardMode::rate_based;
  reward.alpha = 0.5;

  const RunMetrics m = checkpoint_mean(run.out, geo, 2, reward, test);
  const double dql = 0.5 * m.r_total + 0.5 * m.r_min;

  const BucketSearchResult search = bucket_search(geo, 2, reward, validation);
  BucketPolicy bucket(search.kappa);
  const EvalReport bucket_rep = evaluate_pool(bucket, geo, 2, reward, test);
  const double bucket_obj = 0.5 * bucket_rep.r_total + 0.5 * bucket_rep.r_min;

  double reserved_obj = -1.0;
  int best_kr = 0;
  for (int kr = 1; kr < 2; ++kr) {  // with two vehicles the split is fixed
    ReservedPolicy reserved(kr, 2);
    const EvalReport rep = evaluate_pool(reserved, geo, 2, reward, test);
    const double obj = 0.5 * rep.r_total + 0.5 * rep.r_min;
    if (obj > reserved_obj) {
      reserved_obj = obj;
      best_kr = kr;
    }
  }
  detail = fmt("objective: dql %.4f vs bucket %.4f (kappa %.2f) vs reserved "
               "%.4f (kappa_r %d)",
               dql, bucket_obj, search.kappa, reserved_obj, best_kr);
  return dql > bucket_obj && dql > reserved_obj;
}

// ---- criterion 9: tuned bucket serves both regions near-equally ---------

bool check_bucket_equality(const Geography& geo,
                           const std::vector<RequestInstance>& validation,
                           const std::vector<RequestInstance>& test,
                           std::string& detail) {
  RewardParams reward;
  reward.mode = RewardMode::rate_based;
  reward.alpha = 0.5;
  const BucketSearchResult search = bucket_search(geo, 1, reward, validation);
  BucketPolicy bucket(search.kappa);
  const EvalReport rep = evaluate_pool(bucket, geo, 1, reward, test);
  const double gap = std::abs(rep.r_region[0] - rep.r_region[1]);
  detail = fmt("kappa %.2f, rates %.3f/%.3f, |gap| %.3f", search.kappa,
               rep.r_region[0], rep.r_region[1], gap);
  return gap <= 0.03;
}

// ---- criterion 10: demand feedback over a simulated year ----------------

bool check_long_term(const RunConfig& run0, const RunConfig& run5,
                     const Geography& geo, std::string& detail) {
  Timer t;
  ensure_run(run0);
  ensure_run(run5);
  LongTermConfig lt;
  lt.months = 12;
  lt.days_per_month = 30;
  lt.r_threshold = 0.70;
  lt.seed = run0.pools.test_seed;

  const auto p0 = make_policy("run:" + run0.out, run0);
  const auto p5 = make_policy("run:" + run5.out, run5);
  const LongTermResult r0 = long_term(*p0, geo, 1, run0.reward, lt);
  const LongTermResult r5 = long_term(*p5, geo, 1, run5.reward, lt);

  int declines = 0;
  for (size_t m = 1; m < r0.months.size(); ++m)
    if (r0.months[m].lambda[0] < r0.months[m - 1].lambda[0]) ++declines;

  const double lambda0 = geo.regions[0].arrival_rate;
  double worst_dev = 0.0;
  for (const MonthStats& month : r5.months)
    worst_dev = std::max(worst_dev, std::abs(month.lambda[0] - lambda0));

  detail = fmt("alpha=0 lambda_1 declines %d/11 (%.1f -> %.1f), alpha=0.5 "
               "max deviation %.1f%% of initial, %.0f s",
               declines, r0.months.front().lambda[0], r0.months.back().lambda[0],
               100.0 * worst_dev / lambda0, t.seconds());
  return declines >= 9 && worst_dev <= 0.10 * lambda0 && t.seconds() < 600.0;
}

// ---- criterion 11: every command is byte-reproducible -------------------

using Tree = std::map<std::string, std::string>;

Tree snapshot(const std::string& dir) {
  Tree tree;
  for (const fs::directory_entry& entry : fs::recursive_directory_iterator(dir))
    if (entry.is_regular_file())
      tree[fs::relative(entry.path(), dir).string()] =
          slurp(entry.path().string());
  return tree;
}

bool rerun_identical(const std::string& label,
                     const std::function<void(const std::string&)>& command,
                     std::string& detail) {
  const std::string dir = g_root + "/det_" + label;
  fs::remove_all(dir);
  command(dir);
  const Tree first = snapshot(dir);
  fs::remove_all(dir);
  command(dir);
  const Tree second = snapshot(dir);
  fs::remove_all(dir);
  if (first == second && !first.empty()) return true;
  detail = label + ": rerun differs";
  for (const auto& [name, bytes] : first) {
    const auto it = second.find(name);
    if (it == second.end() || it->second != bytes) {
      detail = label + ": rerun differs at " + name;
      break;
    }
  }
  return false;
}

bool check_determinism(std::string& detail) {
  RunConfig tiny = RunConfig::defaults("desk");
  tiny.pools.train_days = 2;
  tiny.pools.test_days = 2;
  tiny.pools.validation_days = 2;
  tiny.train.epochs = 4;
  tiny.train.hidden = {4};
  tiny.train.batch_size = 4;
  tiny.train.buffer_capacity = 64;
  tiny.train.checkpoint_period = 2;

  if (!rerun_identical("gen",
                       [&](const std::string& d) { cmd_gen(tiny, 2, 7, d); },
                       detail))
    return false;
  if (!rerun_identical("train",
                       [&](const std::string& d) {
                         RunConfig cfg = tiny;
                         cfg.out = d;
                         cmd_train(cfg);
                       },
                       detail))
    return false;
  if (!rerun_identical("eval",
                       [&](const std::string& d) {
                         cmd_eval(tiny, {"myopic", "bucket:0.5"}, 1, true, d);
                       },
                       detail))
    return false;
  if (!rerun_identical("sweep",
                       [&](const std::string& d) {
                         cmd_sweep(tiny, {0.0, 0.5}, 1, d);
                       },
                       detail))
    return false;
  if (!rerun_identical("bucket_search",
                       [&](const std::string& d) { cmd_bucket_search(tiny, d); },
                       detail))
    return false;
  if (!rerun_identical("longterm",
                       [&](const std::string& d) {
                         cmd_longterm(tiny, {"myopic"}, 0.7, 2, 2, d);
                       },
                       detail))
    return false;
  if (!rerun_identical("reward_profile",
                       [&](const std::string& d) {
                         cmd_reward_profile(tiny, "myopic", 2, d);
                       },
                       detail))
    return false;

  // Worker count must not leak into the report bytes either.
  const std::string a = g_root + "/det_jobs1";
  const std::string b = g_root + "/det_jobs3";
  fs::remove_all(a);
  fs::remove_all(b);
  cmd_eval(tiny, {"myopic"}, 1, false, a);
  cmd_eval(tiny, {"myopic"}, 3, false, b);
  const bool jobs_ok = snapshot(a) == snapshot(b);
  fs::remove_all(a);
  fs::remove_all(b);
  if (!jobs_ok) {
    detail = "eval bytes depend on --jobs";
    return false;
  }
  detail = "gen/train/eval/sweep/bucket-search/longterm/reward-profile rerun "
           "byte-identical; eval invariant to --jobs";
  return true;
}

void run_check(int id, const char* what,
               const std::function<bool(std::string&)>& check) {
  std::string detail;
  bool pass = false;
  try {
    pass = check(detail);
  } catch (const std::exception& e) {
    detail = std::string("exception: ") + e.what();
  }
  verdict(id, what, pass, detail);
}

}  // namespace

int main(int argc, char** argv) {
  if (argc > 1) g_root = argv[1];
  fs::create_directories(g_root);

  run_check(1, "insertion matches exhaustive enumeration", check_routing);
  run_check(2, "rate rewards telescope to day totals", check_telescoping);
  run_check(3, "fixed-denominator reward decomposition", check_modified_reward);
  run_check(4, "two-region worked example values", check_worked_example);
  run_check(5, "rate rewards decay by the late day", check_reward_decay);
  run_check(6, "analytic gradients match finite differences", check_gradients);

  const RunConfig run0 = desk_run(0.0, 1, "t1_alpha0");
  const RunConfig run5 = desk_run(0.5, 1, "t2_alpha05");
  const Geography desk = run0.geography.build();
  const std::vector<RequestInstance> test =
      make_pool(desk, run0.pools.test_seeds());
  const std::vector<RequestInstance> validation =
      make_pool(desk, run0.pools.validation_seeds());

  run_check(7, "training trades utility for fairness",
            [&](std::string& d) { return check_fairness(run0, run5, desk, test, d); });
  run_check(8, "trained policy beats tuned benchmarks", [&](std::string& d) {
    return check_benchmarks(desk, validation, test, d);
  });
  run_check(9, "tuned bucket nearly equalizes regions", [&](std::string& d) {
    return check_bucket_equality(desk, validation, test, d);
  });
  run_check(10, "demand feedback over a year", [&](std::string& d) {
    return check_long_term(run0, run5, desk, d);
  });
  run_check(11, "commands rerun byte-for-byte", check_determinism);

  std::printf("%d/11 criteria passed\n", 11 - g_failed);
  return g_failed == 0 ? 0 : 1;
}
