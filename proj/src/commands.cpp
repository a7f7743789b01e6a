#include "sdd/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "sdd/dqn.hpp"
#include "sdd/eval.hpp"
#include "sdd/features.hpp"
#include "sdd/policies.hpp"

namespace fs = std::filesystem;

namespace sdd {

namespace {

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw config_error("cannot create directory " + dir + ": " + ec.message());
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw config_error("cannot write " + path);
  out << text;
}

std::string sanitize(const std::string& spec) {
  std::string name = spec;
  for (char& c : name)
    if (c == ':' || c == '/' || c == '\\' || c == '.') c = '_';
  return name;
}

// ckpt_<epoch>.json files in a run directory, sorted by epoch.
std::vector<std::pair<int, std::string>> list_checkpoints(
    const std::string& run_dir) {
  std::vector<std::pair<int, std::string>> found;
  if (!fs::is_directory(run_dir))
    throw config_error("not a run directory: " + run_dir);
  for (const fs::directory_entry& entry : fs::directory_iterator(run_dir)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("ckpt_", 0) != 0 || name.size() <= 10 ||
        name.substr(name.size() - 5) != ".json")
      continue;
    try {
      const int epoch = std::stoi(name.substr(5, name.size() - 10));
      found.emplace_back(epoch, entry.path().string());
    } catch (const std::exception&) {
      continue;  // unrelated file
    }
  }
  std::sort(found.begin(), found.end());
  if (found.empty())
    throw config_error("no checkpoints found in " + run_dir);
  return found;
}

std::vector<RequestInstance> make_pool(const Geography& geo,
                                       const std::vector<std::uint64_t>& seeds) {
  std::vector<RequestInstance> pool;
  pool.reserve(seeds.size());
  for (std::uint64_t s : seeds) pool.push_back(sample_instance(geo, s));
  return pool;
}

}  // namespace

std::unique_ptr<Policy> make_policy(const std::string& spec,
                                    const RunConfig& cfg) {
  if (spec == "myopic") return std::make_unique<MyopicPolicy>();
  if (spec == "reject") return std::make_unique<RejectAllPolicy>();
  if (spec.rfind("bucket:", 0) == 0) {
    try {
      return std::make_unique<BucketPolicy>(std::stod(spec.substr(7)));
    } catch (const std::invalid_argument&) {
      throw config_error("bad bucket spec: " + spec);
    }
  }
  if (spec.rfind("reserved:", 0) == 0) {
    try {
      return std::make_unique<ReservedPolicy>(std::stoi(spec.substr(9)),
                                              cfg.vehicles);
    } catch (const std::invalid_argument&) {
      throw config_error("bad reserved spec: " + spec);
    }
  }
  if (spec.rfind("ckpt:", 0) == 0)
    return std::make_unique<NetPolicy>(QNet::load(spec.substr(5)), spec);
  if (spec.rfind("run:", 0) == 0) {
    const auto ckpts = list_checkpoints(spec.substr(4));
    return std::make_unique<NetPolicy>(QNet::load(ckpts.back().second), spec);
  }
  throw config_error("unknown policy spec: " + spec);
}

std::vector<std::unique_ptr<Policy>> load_checkpoint_policies(
    const std::string& run_dir, int last_n) {
  auto ckpts = list_checkpoints(run_dir);
  if (static_cast<int>(ckpts.size()) > last_n)
    ckpts.erase(ckpts.begin(), ckpts.end() - last_n);
  std::vector<std::unique_ptr<Policy>> policies;
  for (const auto& [epoch, path] : ckpts)
    policies.push_back(std::make_unique<NetPolicy>(
        QNet::load(path), "ckpt:" + std::to_string(epoch)));
  return policies;
}

void cmd_gen(const RunConfig& cfg, int count, std::uint64_t seed,
             const std::string& out_dir) {
  if (count < 0) throw config_error("gen: count must be non-negative");
  ensure_dir(out_dir);
  const Geography geo = cfg.geography.build();
  save_geography(geo, out_dir + "/geography.json");
  nlohmann::json manifest;
  manifest["schema"] = 1;
  manifest["geography"] = "geography.json";
  manifest["count"] = count;
  nlohmann::json entries = nlohmann::json::array();
  for (int i = 0; i < count; ++i) {
    const std::uint64_t s = seed + i;
    const RequestInstance inst = sample_instance(geo, s);
    const std::string file = "instance_" + std::to_string(s) + ".csv";
    std::ofstream out(out_dir + "/" + file);
    if (!out) throw config_error("cannot write " + out_dir + "/" + file);
    write_instance_csv(inst, out);
    entries.push_back({{"seed", s}, {"file", file}, {"requests", inst.size()}});
  }
  manifest["entries"] = entries;
  write_file(out_dir + "/manifest.json", manifest.dump(2) + "\n");
}

void cmd_train(const RunConfig& cfg) {
  cfg.validate();
  ensure_dir(cfg.out);
  const Geography geo = cfg.geography.build();
  write_file(cfg.out + "/config.json", cfg.to_json());
  save_geography(geo, cfg.out + "/geography.json");
  write_file(cfg.out + "/feature_schema.json",
             feature_schema_json(geo.region_count(), cfg.vehicles));
  const std::vector<RequestInstance> pool =
      make_pool(geo, cfg.pools.train_seeds());
  const std::vector<RequestInstance> validation =
      make_pool(geo, cfg.pools.validation_seeds());
  const TrainResult result =
      train(geo, cfg.vehicles, cfg.reward, cfg.train, pool, validation, cfg.out);

  // Last-ten means on the held-out test pool, the headline numbers of a run.
  const std::vector<RequestInstance> test =
      make_pool(geo, cfg.pools.test_seeds());
  nlohmann::json summary;
  summary["schema"] = 1;
  summary["checkpoint_epochs"] = result.checkpoint_epochs;
  nlohmann::json rows = nlohmann::json::array();
  double r_total = 0.0, r_min = 0.0, utility = 0.0;
  const int n = static_cast<int>(result.last_checkpoints.size());
  const int first_epoch_idx =
      static_cast<int>(result.checkpoint_epochs.size()) - n;
  for (int i = 0; i < n; ++i) {
    NetPolicy policy(result.last_checkpoints[i]);
    const EvalReport rep =
        evaluate_pool(policy, geo, cfg.vehicles, cfg.reward, test);
    rows.push_back({{"epoch", result.checkpoint_epochs[first_epoch_idx + i]},
                    {"r_total", rep.r_total},
                    {"r_min", rep.r_min},
                    {"utility", rep.utility}});
    r_total += rep.r_total;
    r_min += rep.r_min;
    utility += rep.utility;
  }
  summary["last_checkpoints"] = rows;
  summary["mean"] = {{"r_total", r_total / n},
                     {"r_min", r_min / n},
                     {"utility", utility / n}};
  write_file(cfg.out + "/train_summary.json", summary.dump(2) + "\n");
}

void cmd_eval(const RunConfig& cfg, const std::vector<std::string>& specs,
              int jobs, bool trace, const std::string& out_dir) {
  if (specs.empty()) throw config_error("eval: no policy specs given");
  // Parse every spec up front so a typo in the last one cannot leave a
  // half-written output directory behind.
  for (const std::string& spec : specs) make_policy(spec, cfg);
  ensure_dir(out_dir);
  const Geography geo = cfg.geography.build();
  const std::vector<RequestInstance> test =
      make_pool(geo, cfg.pools.test_seeds());
  for (const std::string& spec : specs) {
    const std::string name = sanitize(spec);
    if (spec.rfind("run:", 0) == 0) {
      const auto policies = load_checkpoint_policies(spec.substr(4));
      nlohmann::json rows = nlohmann::json::array();
      double r_total = 0.0, r_min = 0.0, utility = 0.0;
      for (const auto& policy : policies) {
        const EvalReport rep =
            evaluate_pool(*policy, geo, cfg.vehicles, cfg.reward, test, jobs);
        rows.push_back({{"policy", policy->name()},
                        {"r_total", rep.r_total},
                        {"r_min", rep.r_min},
                        {"utility", rep.utility}});
        r_total += rep.r_total;
        r_min += rep.r_min;
        utility += rep.utility;
      }
      const double n = static_cast<double>(policies.size());
      nlohmann::json j;
      j["schema"] = 1;
      j["spec"] = spec;
      j["instances"] = static_cast<int>(test.size());
      j["checkpoints"] = rows;
      j["mean"] = {{"r_total", r_total / n},
                   {"r_min", r_min / n},
                   {"utility", utility / n}};
      write_file(out_dir + "/eval_" + name + ".json", j.dump(2) + "\n");
    } else {
      const std::unique_ptr<Policy> policy = make_policy(spec, cfg);
      const EvalReport rep =
          evaluate_pool(*policy, geo, cfg.vehicles, cfg.reward, test, jobs);
      write_file(out_dir + "/eval_" + name + ".json", eval_report_json(rep));
      std::ofstream csv(out_dir + "/eval_" + name + ".csv");
      if (!csv) throw config_error("cannot write eval csv for " + spec);
      write_eval_report_csv(rep, csv);
    }
    if (trace) {
      const std::unique_ptr<Policy> policy = make_policy(spec, cfg);
      Env env(geo, cfg.vehicles, cfg.reward);
      env.record_decisions(true);
      policy->begin_day();
      env.reset(test.front());
      while (!env.done()) env.step(policy->act(env));
      std::ofstream decisions(out_dir + "/decisions_" + name + ".csv");
      if (!decisions) throw config_error("cannot write decision log for " + spec);
      write_decision_log(env.decisions(), geo.region_count(), decisions);
      std::ofstream routes(out_dir + "/routes_" + name + ".csv");
      if (!routes) throw config_error("cannot write route trace for " + spec);
      write_route_trace(env.fleet(), geo, routes);
    }
  }
}

void cmd_sweep(const RunConfig& cfg, const std::vector<double>& alphas,
               int jobs, const std::string& out_dir) {
  if (alphas.empty()) throw config_error("sweep: no alphas given");
  ensure_dir(out_dir);
  const Geography geo = cfg.geography.build();
  std::vector<ParetoInput> inputs;
  std::vector<std::vector<std::unique_ptr<Policy>>> keepalive;
  for (double alpha : alphas) {
    char sub[32];
    std::snprintf(sub, sizeof(sub), "alpha_%.3f", alpha);
    const std::string run_dir = out_dir + "/" + sub;
    bool have = false;
    if (fs::is_directory(run_dir)) {
      try {
        list_checkpoints(run_dir);
        have = true;
      } catch (const config_error&) {
        have = false;
      }
    }
    if (!have) {
      RunConfig sub_cfg = cfg;
      sub_cfg.reward.alpha = alpha;
      sub_cfg.out = run_dir;
      cmd_train(sub_cfg);
    }
    keepalive.push_back(load_checkpoint_policies(run_dir));
    ParetoInput input;
    input.alpha = alpha;
    for (const auto& p : keepalive.back()) input.policies.push_back(p.get());
    inputs.push_back(std::move(input));
  }
  const std::vector<ParetoRow> rows =
      pareto_sweep(inputs, geo, cfg.vehicles, cfg.pools.test_seeds(), jobs);
  std::ofstream csv(out_dir + "/pareto.csv");
  if (!csv) throw config_error("cannot write pareto.csv");
  write_pareto_csv(rows, csv);
}

void cmd_bucket_search(const RunConfig& cfg, const std::string& out_dir) {
  ensure_dir(out_dir);
  const Geography geo = cfg.geography.build();
  const std::vector<RequestInstance> validation =
      make_pool(geo, cfg.pools.validation_seeds());
  const BucketSearchResult result =
      bucket_search(geo, cfg.vehicles, cfg.reward, validation);
  nlohmann::json j;
  j["schema"] = 1;
  j["kappa"] = result.kappa;
  j["r_min"] = result.r_min;
  j["r_total"] = result.r_total;
  j["evaluated"] = result.evaluated;
  write_file(out_dir + "/bucket_search.json", j.dump(2) + "\n");
}

void cmd_longterm(const RunConfig& cfg, const std::vector<std::string>& specs,
                  double threshold, int months, int days_per_month,
                  const std::string& out_dir) {
  if (specs.empty()) throw config_error("longterm: no policy specs given");
  for (const std::string& spec : specs) make_policy(spec, cfg);
  ensure_dir(out_dir);
  const Geography geo = cfg.geography.build();
  LongTermConfig lt;
  lt.months = months;
  lt.days_per_month = days_per_month;
  lt.r_threshold = threshold;
  lt.seed = cfg.pools.test_seed;
  for (const std::string& spec : specs) {
    const std::unique_ptr<Policy> policy = make_policy(spec, cfg);
    const LongTermResult result =
        long_term(*policy, geo, cfg.vehicles, cfg.reward, lt);
    std::ofstream csv(out_dir + "/longterm_" + sanitize(spec) + ".csv");
    if (!csv) throw config_error("cannot write longterm csv for " + spec);
    write_long_term_csv(result, csv);
  }
}

void cmd_reward_profile(const RunConfig& cfg, const std::string& spec,
                        int days, const std::string& out_dir) {
  if (days < 1) throw config_error("reward profile: days must be positive");
  ensure_dir(out_dir);
  const Geography geo = cfg.geography.build();
  const std::unique_ptr<Policy> policy = make_policy(spec, cfg);
  const std::vector<ProfileBin> bins =
      reward_profile(*policy, geo, cfg.vehicles, cfg.reward.alpha,
                     seed_block(cfg.pools.test_seed, days));
  std::ofstream csv(out_dir + "/reward_profile_" + sanitize(spec) + ".csv");
  if (!csv) throw config_error("cannot write reward profile csv");
  write_profile_csv(bins, csv);
}

}  // namespace sdd
