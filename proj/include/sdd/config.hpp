#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "sdd/dqn.hpp"
#include "sdd/env.hpp"
#include "sdd/world.hpp"

namespace sdd {

// Where the map comes from: a builtin (with optional tweaks) or a file.
struct GeographySpec {
  std::string builtin = "dens";  // "dist" | "dens"; ignored when file set
  std::string file;
  double d_km = 3.0;
  double lambda_scale = 1.0;  // applied to builtin defaults
  std::optional<std::pair<double, double>> lambda;  // overrides scale
  std::optional<Vec2> depot;

  Geography build() const;
};

// Seed blocks for the three instance pools; pool i uses seed_base + i.
struct PoolSpec {
  int train_days = 200;
  int test_days = 100;
  int validation_days = 20;
  std::uint64_t train_seed = 10000;
  std::uint64_t test_seed = 20000;
  std::uint64_t validation_seed = 30000;

  void validate() const;
  std::vector<std::uint64_t> train_seeds() const;
  std::vector<std::uint64_t> test_seeds() const;
  std::vector<std::uint64_t> validation_seeds() const;
};

struct RunConfig {
  std::string profile = "desk";  // "desk" | "paper"
  GeographySpec geography;
  int vehicles = 1;
  RewardParams reward;
  TrainConfig train;
  PoolSpec pools;
  std::string out = "run";

  // Profile defaults; config files and flags overlay these.
  static RunConfig defaults(const std::string& profile);

  void validate() const;
  std::string to_json() const;  // fully resolved snapshot
};

// Overlays `text` (a config JSON) onto the profile defaults; unknown keys
// are config errors.
RunConfig run_config_from_json(const std::string& text,
                               const std::string& profile);
RunConfig load_run_config(const std::string& path, const std::string& profile);

std::vector<std::uint64_t> seed_block(std::uint64_t base, int count);

}  // namespace sdd
