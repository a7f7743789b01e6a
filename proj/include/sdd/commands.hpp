#pragma once

#include <memory>
#include <string>
#include <vector>

#include "sdd/config.hpp"
#include "sdd/policy.hpp"

namespace sdd {

// Policy spec grammar: myopic | reject | bucket:<kappa> | reserved:<kappa_r>
// | ckpt:<file> | run:<dir> (run = the newest checkpoint in the directory).
std::unique_ptr<Policy> make_policy(const std::string& spec,
                                    const RunConfig& cfg);

// The up-to `last_n` newest checkpoints of a run directory, oldest first.
std::vector<std::unique_ptr<Policy>> load_checkpoint_policies(
    const std::string& run_dir, int last_n = 10);

// Instance CSVs for seeds seed..seed+count-1 plus manifest.json and the
// geography snapshot.
void cmd_gen(const RunConfig& cfg, int count, std::uint64_t seed,
             const std::string& out_dir);

// Trains into cfg.out: config.json, geography.json, feature_schema.json,
// ckpt_<epoch>.json, train_log.csv, and a train_summary.json with the
// last-ten-checkpoint means on the test pool.
void cmd_train(const RunConfig& cfg);

// Evaluates each policy spec on the test pool; run: specs additionally get
// per-checkpoint rows and their mean. With trace, the first test day also
// dumps decision and route CSVs.
void cmd_eval(const RunConfig& cfg, const std::vector<std::string>& specs,
              int jobs, bool trace, const std::string& out_dir);

// Trains (or reuses) one run per alpha under out_dir/alpha_<a>, then writes
// the combined pareto.csv.
void cmd_sweep(const RunConfig& cfg, const std::vector<double>& alphas,
               int jobs, const std::string& out_dir);

void cmd_bucket_search(const RunConfig& cfg, const std::string& out_dir);

void cmd_longterm(const RunConfig& cfg, const std::vector<std::string>& specs,
                  double threshold, int months, int days_per_month,
                  const std::string& out_dir);

void cmd_reward_profile(const RunConfig& cfg, const std::string& spec,
                        int days, const std::string& out_dir);

}  // namespace sdd
