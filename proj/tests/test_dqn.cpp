#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <vector>

#include "sdd/dqn.hpp"
#include "sdd/policies.hpp"

using namespace sdd;

namespace {

Geography tiny_geo() {
  return builtin_geography(GeographyKind::dens, 3.0, std::make_pair(5.0, 20.0));
}

RewardParams modified_params(double alpha) {
  RewardParams p;
  p.mode = RewardMode::modified;
  p.alpha = alpha;
  return p;
}

// Constant-output network: zero weights, biases = the wanted Q-values.
QNet const_qnet(int input_dim, const std::vector<double>& q) {
  nlohmann::json j;
  j["schema"] = 1;
  j["sizes"] = {input_dim, static_cast<int>(q.size())};
  nlohmann::json layer;
  layer["W"] = std::vector<double>(input_dim * q.size(), 0.0);
  layer["b"] = q;
  j["layers"] = nlohmann::json::array({layer});
  return QNet::from_json(j.dump());
}

// A single request; a window shorter than load time plus the travel leg
// leaves no feasible slot, so rejecting is forced.
Env one_request_env(int vehicles, double minute, double window = 240.0) {
  Env env(tiny_geo(), vehicles, modified_params(0.5));
  RequestInstance inst;
  Request r;
  r.index = 1;
  r.time_minutes = minute;
  r.location = Vec2(4.5, 3.0);
  r.region_id = 2;
  r.deadline_minutes = minute + window;
  inst.requests = {r};
  env.reset(inst);
  return env;
}

std::vector<RequestInstance> make_pool(const Geography& geo, int days,
                                       std::uint64_t first_seed) {
  std::vector<RequestInstance> pool;
  for (int d = 0; d < days; ++d)
    pool.push_back(sample_instance(geo, first_seed + d));
  return pool;
}

}  // namespace

TEST_CASE("replay ring overwrites the oldest entries") {
  CHECK_THROWS_AS(ReplayBuffer(0), config_error);
  ReplayBuffer buf(3);
  for (int i = 1; i <= 5; ++i) {
    Experience e;
    e.action = i;
    buf.push(std::move(e));
  }
  CHECK(buf.size() == 3);
  CHECK(buf.capacity() == 3);
  std::multiset<int> kept;
  for (int i = 0; i < buf.size(); ++i) kept.insert(buf.at(i).action);
  CHECK(kept == std::multiset<int>({3, 4, 5}));
}

TEST_CASE("batch sampling is uniform over distinct slots") {
  ReplayBuffer buf(100);
  for (int i = 0; i < 60; ++i) {
    Experience e;
    e.action = i;
    buf.push(std::move(e));
  }
  rng::Engine eng(8);
  std::vector<int> picks;
  for (int round = 0; round < 50; ++round) {
    buf.sample(16, eng, picks);
    REQUIRE(picks.size() == 16);
    std::set<int> uniq(picks.begin(), picks.end());
    CHECK(uniq.size() == 16);
    CHECK(*uniq.begin() >= 0);
    CHECK(*uniq.rbegin() < 60);
  }
  // Asking for the full buffer returns every slot exactly once.
  buf.sample(60, eng, picks);
  std::set<int> all(picks.begin(), picks.end());
  CHECK(all.size() == 60);
  CHECK_THROWS_AS(buf.sample(61, eng, picks), contract_error);
}

TEST_CASE("epsilon decays exponentially and bottoms out") {
  TrainConfig cfg;
  cfg.epochs = 1000;
  cfg.eps_start = 1.0;
  cfg.eps_end = 0.01;
  cfg.eps_decay_fraction = 0.9;
  CHECK(epsilon_at(0, cfg) == doctest::Approx(1.0));
  CHECK(epsilon_at(900, cfg) == doctest::Approx(0.01).epsilon(1e-9));
  CHECK(epsilon_at(999, cfg) == doctest::Approx(0.01));
  // Halfway through the decay the schedule sits at the geometric midpoint.
  CHECK(epsilon_at(450, cfg) == doctest::Approx(0.1).epsilon(1e-9));
  double prev = 1.0;
  for (long e = 0; e < 1000; e += 50) {
    const double now = epsilon_at(e, cfg);
    CHECK(now <= prev + 1e-12);
    prev = now;
  }
}

TEST_CASE("train config is validated") {
  TrainConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  CHECK(cfg.effective_checkpoint_period() == 2000);
  cfg.epochs = 50;
  CHECK(cfg.effective_checkpoint_period() == 1);
  cfg.checkpoint_period = 7;
  CHECK(cfg.effective_checkpoint_period() == 7);

  TrainConfig bad = TrainConfig{};
  bad.epochs = 0;
  CHECK_THROWS_AS(bad.validate(), config_error);
  bad = TrainConfig{};
  bad.buffer_capacity = 8;
  bad.batch_size = 32;
  CHECK_THROWS_AS(bad.validate(), config_error);
  bad = TrainConfig{};
  bad.eps_end = 0.0;
  CHECK_THROWS_AS(bad.validate(), config_error);
  bad = TrainConfig{};
  bad.eps_start = 0.5;
  bad.eps_end = 0.6;
  CHECK_THROWS_AS(bad.validate(), config_error);
  bad = TrainConfig{};
  bad.hidden = {32, 0};
  CHECK_THROWS_AS(bad.validate(), config_error);
}

TEST_CASE("greedy policy assigns unless rejecting is strictly better") {
  const int D1 = feature_dim(2, 1);
  Env feasible_env = one_request_env(1, 10.0);
  REQUIRE(feasible_env.any_feasible());

  NetPolicy prefer_assign(const_qnet(D1, {0.2, 0.5}));
  CHECK(prefer_assign.act(feasible_env) == 1);
  NetPolicy prefer_reject(const_qnet(D1, {0.5, 0.2}));
  CHECK(prefer_reject.act(feasible_env) == 0);
  NetPolicy tie(const_qnet(D1, {0.5, 0.5}));
  CHECK(tie.act(feasible_env) == 1);  // rejecting needs a strict win

  // Without a feasible slot the only move is to reject.
  Env stuck_env = one_request_env(1, 419.0, 5.0);
  REQUIRE_FALSE(stuck_env.any_feasible());
  CHECK(prefer_assign.act(stuck_env) == 0);

  const int D2 = feature_dim(2, 2);
  Env two_env = one_request_env(2, 10.0);
  NetPolicy veh_tie(const_qnet(D2, {0.0, 0.3, 0.3}));
  CHECK(veh_tie.act(two_env) == 1);  // equal vehicles: lowest index
  NetPolicy second(const_qnet(D2, {0.0, 0.1, 0.3}));
  CHECK(second.act(two_env) == 2);
}

TEST_CASE("training is a pure function of config and pool") {
  const Geography geo = tiny_geo();
  const std::vector<RequestInstance> pool = make_pool(geo, 10, 900);
  TrainConfig cfg;
  cfg.epochs = 30;
  cfg.hidden = {8};
  cfg.batch_size = 8;
  cfg.buffer_capacity = 256;
  cfg.target_sync = 50;
  cfg.seed = 5;

  const TrainResult a = train(geo, 1, modified_params(0.5), cfg, pool);
  const TrainResult b = train(geo, 1, modified_params(0.5), cfg, pool);
  CHECK(a.net.to_json() == b.net.to_json());
  REQUIRE(a.checkpoint_epochs == b.checkpoint_epochs);
  REQUIRE(a.last_checkpoints.size() == b.last_checkpoints.size());
  for (size_t i = 0; i < a.last_checkpoints.size(); ++i)
    CHECK(a.last_checkpoints[i].to_json() == b.last_checkpoints[i].to_json());

  cfg.seed = 6;
  const TrainResult c = train(geo, 1, modified_params(0.5), cfg, pool);
  CHECK(a.net.to_json() != c.net.to_json());
}

TEST_CASE("checkpoints are kept at the configured period") {
  const Geography geo = tiny_geo();
  const std::vector<RequestInstance> pool = make_pool(geo, 5, 950);
  TrainConfig cfg;
  cfg.epochs = 25;
  cfg.checkpoint_period = 10;
  cfg.hidden = {8};
  cfg.batch_size = 8;
  cfg.buffer_capacity = 128;
  cfg.seed = 2;

  const TrainResult r = train(geo, 1, modified_params(0.0), cfg, pool);
  CHECK(r.checkpoint_epochs == std::vector<int>({10, 20, 25}));
  CHECK(r.last_checkpoints.size() == 3);
  // The last stored checkpoint is the final network.
  CHECK(r.last_checkpoints.back().to_json() == r.net.to_json());
}

TEST_CASE("training writes checkpoints and a log when given a directory") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "sdd_dqn_run_test";
  fs::remove_all(dir);
  fs::create_directories(dir);

  const Geography geo = tiny_geo();
  const std::vector<RequestInstance> pool = make_pool(geo, 6, 970);
  const std::vector<RequestInstance> eval_pool = make_pool(geo, 3, 980);
  TrainConfig cfg;
  cfg.epochs = 20;
  cfg.checkpoint_period = 10;
  cfg.hidden = {8};
  cfg.batch_size = 8;
  cfg.buffer_capacity = 128;
  cfg.seed = 3;

  train(geo, 1, modified_params(0.5), cfg, pool, eval_pool, dir.string());

  CHECK(fs::exists(dir / "ckpt_10.json"));
  CHECK(fs::exists(dir / "ckpt_20.json"));
  QNet::load((dir / "ckpt_20.json").string());  // parses back

  std::ifstream log(dir / "train_log.csv");
  REQUIRE(log.good());
  std::string line;
  std::getline(log, line);
  CHECK(line == "epoch,epsilon,loss,eval_r_total,eval_r_min");
  int rows = 0;
  int eval_rows = 0;
  while (std::getline(log, line)) {
    if (line.empty()) continue;
    ++rows;
    // Checkpoint rows carry the two extra figures; others end with ",,".
    if (line.rfind(",,") != line.size() - 2) ++eval_rows;
  }
  CHECK(rows == 20);
  CHECK(eval_rows == 2);
  fs::remove_all(dir);
}

TEST_CASE("a learned policy matches accept-everything in a small world") {
  // With one vehicle and utility-only rewards, accepting whenever feasible
  // is already strong; the net has to rediscover it from scratch.
  const Geography geo = tiny_geo();
  const std::vector<RequestInstance> pool = make_pool(geo, 30, 1200);
  TrainConfig cfg;
  cfg.epochs = 800;
  cfg.hidden = {16};
  cfg.batch_size = 16;
  cfg.buffer_capacity = 4096;
  cfg.target_sync = 200;
  cfg.seed = 9;

  const RewardParams reward = modified_params(0.0);
  const TrainResult r = train(geo, 1, reward, cfg, pool);

  NetPolicy learned(r.net);
  MyopicPolicy myopic;
  const EvalReport lr = evaluate_pool(learned, geo, 1, reward, pool);
  const EvalReport mr = evaluate_pool(myopic, geo, 1, reward, pool);
  CHECK(lr.r_total >= 0.9 * mr.r_total);
}

TEST_CASE("divergence aborts with a diagnostic") {
  const Geography geo = tiny_geo();
  const std::vector<RequestInstance> pool = make_pool(geo, 4, 1300);
  TrainConfig cfg;
  cfg.epochs = 200;
  cfg.hidden = {8};
  cfg.batch_size = 8;
  cfg.buffer_capacity = 64;
  cfg.seed = 4;
  cfg.adam.lr = 1e18;  // guaranteed blow-up
  CHECK_THROWS_AS(train(geo, 1, modified_params(0.5), cfg, pool), contract_error);
}
