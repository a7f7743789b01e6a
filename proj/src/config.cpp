#include "sdd/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace sdd {

using nlohmann::json;

Geography GeographySpec::build() const {
  if (!file.empty()) return load_geography(file);
  GeographyKind kind;
  if (builtin == "dist")
    kind = GeographyKind::dist;
  else if (builtin == "dens")
    kind = GeographyKind::dens;
  else
    throw config_error("unknown builtin geography: " + builtin);
  Geography geo = builtin_geography(kind, d_km, lambda, depot);
  if (!lambda && lambda_scale != 1.0) {
    if (lambda_scale <= 0.0)
      throw config_error("lambda scale must be positive");
    for (RegionSpec& r : geo.regions) r.arrival_rate *= lambda_scale;
  }
  return geo;
}

void PoolSpec::validate() const {
  if (train_days < 0 || test_days < 0 || validation_days < 0)
    throw config_error("pool sizes must be non-negative");
}

std::vector<std::uint64_t> seed_block(std::uint64_t base, int count) {
  std::vector<std::uint64_t> seeds(count);
  for (int i = 0; i < count; ++i) seeds[i] = base + i;
  return seeds;
}

std::vector<std::uint64_t> PoolSpec::train_seeds() const {
  return seed_block(train_seed, train_days);
}
std::vector<std::uint64_t> PoolSpec::test_seeds() const {
  return seed_block(test_seed, test_days);
}
std::vector<std::uint64_t> PoolSpec::validation_seeds() const {
  return seed_block(validation_seed, validation_days);
}

RunConfig RunConfig::defaults(const std::string& profile) {
  RunConfig cfg;
  cfg.profile = profile;
  if (profile == "desk") {
    cfg.geography.lambda_scale = 0.2;
    cfg.vehicles = 1;
    cfg.train.epochs = 20000;
    cfg.pools.train_days = 200;
    cfg.pools.test_days = 100;
    cfg.pools.validation_days = 20;
  } else if (profile == "paper") {
    cfg.geography.lambda_scale = 1.0;
    cfg.vehicles = 3;
    cfg.train.epochs = 200000;
    cfg.pools.train_days = 1500;
    cfg.pools.test_days = 500;
    cfg.pools.validation_days = 50;
  } else {
    throw config_error("unknown profile: " + profile +
                       " (expected desk or paper)");
  }
  return cfg;
}

void RunConfig::validate() const {
  if (vehicles < 1) throw config_error("vehicles must be positive");
  const Geography geo = geography.build();
  reward.validate(geo.region_count());
  train.validate();
  pools.validate();
  if (out.empty()) throw config_error("output directory must be set");
}

namespace {

void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* key : allowed)
      if (it.key() == key) {
        ok = true;
        break;
      }
    if (!ok)
      throw config_error("config: unknown key \"" + it.key() + "\" in " + where);
  }
}

void overlay_geography(GeographySpec& spec, const json& j) {
  check_keys(j, {"builtin", "file", "d_km", "lambda_scale", "lambda", "depot"},
             "geography");
  if (j.contains("builtin")) spec.builtin = j["builtin"].get<std::string>();
  if (j.contains("file")) spec.file = j["file"].get<std::string>();
  if (j.contains("d_km")) spec.d_km = j["d_km"].get<double>();
  if (j.contains("lambda_scale"))
    spec.lambda_scale = j["lambda_scale"].get<double>();
  if (j.contains("lambda")) {
    const json& l = j["lambda"];
    if (!l.is_array() || l.size() != 2)
      throw config_error("config: lambda must be a two-element array");
    spec.lambda = std::make_pair(l[0].get<double>(), l[1].get<double>());
  }
  if (j.contains("depot")) {
    const json& d = j["depot"];
    if (!d.is_array() || d.size() != 2)
      throw config_error("config: depot must be a two-element array");
    spec.depot = Vec2(d[0].get<double>(), d[1].get<double>());
  }
}

void overlay_reward(RewardParams& reward, const json& j) {
  check_keys(j, {"mode", "alpha", "priorities"}, "reward");
  if (j.contains("mode"))
    reward.mode = reward_mode_from_string(j["mode"].get<std::string>());
  if (j.contains("alpha")) reward.alpha = j["alpha"].get<double>();
  if (j.contains("priorities")) {
    const auto p = j["priorities"].get<std::vector<double>>();
    reward.priorities = VecXd(p.size());
    for (size_t i = 0; i < p.size(); ++i) reward.priorities[i] = p[i];
  }
}

void overlay_train(TrainConfig& train, const json& j) {
  check_keys(j,
             {"epochs", "hidden", "batch_size", "buffer_capacity",
              "target_sync", "eps_start", "eps_end", "eps_decay_fraction",
              "checkpoint_period", "adam", "seed"},
             "train");
  if (j.contains("epochs")) train.epochs = j["epochs"].get<int>();
  if (j.contains("hidden")) train.hidden = j["hidden"].get<std::vector<int>>();
  if (j.contains("batch_size")) train.batch_size = j["batch_size"].get<int>();
  if (j.contains("buffer_capacity"))
    train.buffer_capacity = j["buffer_capacity"].get<int>();
  if (j.contains("target_sync")) train.target_sync = j["target_sync"].get<int>();
  if (j.contains("eps_start")) train.eps_start = j["eps_start"].get<double>();
  if (j.contains("eps_end")) train.eps_end = j["eps_end"].get<double>();
  if (j.contains("eps_decay_fraction"))
    train.eps_decay_fraction = j["eps_decay_fraction"].get<double>();
  if (j.contains("checkpoint_period"))
    train.checkpoint_period = j["checkpoint_period"].get<int>();
  if (j.contains("adam")) {
    const json& a = j["adam"];
    check_keys(a, {"lr", "beta1", "beta2", "eps"}, "train.adam");
    if (a.contains("lr")) train.adam.lr = a["lr"].get<double>();
    if (a.contains("beta1")) train.adam.beta1 = a["beta1"].get<double>();
    if (a.contains("beta2")) train.adam.beta2 = a["beta2"].get<double>();
    if (a.contains("eps")) train.adam.eps = a["eps"].get<double>();
  }
  if (j.contains("seed")) train.seed = j["seed"].get<std::uint64_t>();
}

void overlay_pools(PoolSpec& pools, const json& j) {
  check_keys(j,
             {"train_days", "test_days", "validation_days", "train_seed",
              "test_seed", "validation_seed"},
             "pools");
  if (j.contains("train_days")) pools.train_days = j["train_days"].get<int>();
  if (j.contains("test_days")) pools.test_days = j["test_days"].get<int>();
  if (j.contains("validation_days"))
    pools.validation_days = j["validation_days"].get<int>();
  if (j.contains("train_seed"))
    pools.train_seed = j["train_seed"].get<std::uint64_t>();
  if (j.contains("test_seed"))
    pools.test_seed = j["test_seed"].get<std::uint64_t>();
  if (j.contains("validation_seed"))
    pools.validation_seed = j["validation_seed"].get<std::uint64_t>();
}

}  // namespace

RunConfig run_config_from_json(const std::string& text,
                               const std::string& profile) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw config_error(std::string("config json: ") + e.what());
  }
  std::string effective = profile;
  if (j.contains("profile") && profile.empty())
    effective = j["profile"].get<std::string>();
  if (effective.empty()) effective = "desk";
  RunConfig cfg = RunConfig::defaults(effective);
  try {
    check_keys(j,
               {"schema", "profile", "geography", "vehicles", "reward",
                "train", "pools", "out"},
               "config root");
    if (j.contains("schema") && j["schema"].get<int>() != 1)
      throw config_error("config json: unsupported schema");
    if (j.contains("geography")) overlay_geography(cfg.geography, j["geography"]);
    if (j.contains("vehicles")) cfg.vehicles = j["vehicles"].get<int>();
    if (j.contains("reward")) overlay_reward(cfg.reward, j["reward"]);
    if (j.contains("train")) overlay_train(cfg.train, j["train"]);
    if (j.contains("pools")) overlay_pools(cfg.pools, j["pools"]);
    if (j.contains("out")) cfg.out = j["out"].get<std::string>();
  } catch (const json::exception& e) {
    throw config_error(std::string("config json: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

RunConfig load_run_config(const std::string& path, const std::string& profile) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return run_config_from_json(buf.str(), profile);
}

std::string RunConfig::to_json() const {
  json j;
  j["schema"] = 1;
  j["profile"] = profile;
  json g;
  if (!geography.file.empty()) {
    g["file"] = geography.file;
  } else {
    g["builtin"] = geography.builtin;
    g["d_km"] = geography.d_km;
    g["lambda_scale"] = geography.lambda_scale;
    if (geography.lambda)
      g["lambda"] = {geography.lambda->first, geography.lambda->second};
    if (geography.depot)
      g["depot"] = {geography.depot->x(), geography.depot->y()};
  }
  j["geography"] = g;
  j["vehicles"] = vehicles;
  json r;
  r["mode"] = to_string(reward.mode);
  r["alpha"] = reward.alpha;
  if (reward.priorities.size() > 0) {
    std::vector<double> p(reward.priorities.data(),
                          reward.priorities.data() + reward.priorities.size());
    r["priorities"] = p;
  }
  j["reward"] = r;
  json t;
  t["epochs"] = train.epochs;
  t["hidden"] = train.hidden;
  t["batch_size"] = train.batch_size;
  t["buffer_capacity"] = train.buffer_capacity;
  t["target_sync"] = train.target_sync;
  t["eps_start"] = train.eps_start;
  t["eps_end"] = train.eps_end;
  t["eps_decay_fraction"] = train.eps_decay_fraction;
  t["checkpoint_period"] = train.effective_checkpoint_period();
  t["adam"] = {{"lr", train.adam.lr},
               {"beta1", train.adam.beta1},
               {"beta2", train.adam.beta2},
               {"eps", train.adam.eps}};
  t["seed"] = train.seed;
  j["train"] = t;
  json p;
  p["train_days"] = pools.train_days;
  p["test_days"] = pools.test_days;
  p["validation_days"] = pools.validation_days;
  p["train_seed"] = pools.train_seed;
  p["test_seed"] = pools.test_seed;
  p["validation_seed"] = pools.validation_seed;
  j["pools"] = p;
  j["out"] = out;
  return j.dump(2) + "\n";
}

}  // namespace sdd
