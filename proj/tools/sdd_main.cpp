#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sdd/commands.hpp"

namespace {

struct GlobalArgs {
  std::string config_path;
  std::string profile;
  std::string out;
  std::uint64_t seed = 0;
  bool seed_set = false;
  bool out_set = false;
  int jobs = 1;
};

sdd::RunConfig resolve_config(const GlobalArgs& args) {
  sdd::RunConfig cfg =
      args.config_path.empty()
          ? sdd::RunConfig::defaults(args.profile.empty() ? "desk"
                                                          : args.profile)
          : sdd::load_run_config(args.config_path, args.profile);
  if (args.seed_set) cfg.train.seed = args.seed;
  if (args.out_set) cfg.out = args.out;
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"same-day dispatch simulator and learning toolkit"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalArgs args;
  app.add_option("--config", args.config_path, "config JSON file");
  app.add_option("--profile", args.profile, "scale profile")
      ->check(CLI::IsMember({"desk", "paper"}));
  CLI::Option* seed_opt =
      app.add_option("--seed", args.seed, "training seed override");
  app.add_option("--jobs", args.jobs, "parallel evaluation workers")
      ->check(CLI::Range(1, 1024));
  CLI::Option* out_opt =
      app.add_option("--out", args.out, "output directory");

  CLI::App* gen = app.add_subcommand("gen", "write instance CSVs + manifest");
  int gen_count = 0;
  std::uint64_t gen_seed = 0;
  bool gen_seed_set = false;
  gen->add_option("--count", gen_count, "number of instances")->required();
  CLI::Option* gen_seed_opt =
      gen->add_option("--first-seed", gen_seed, "seed of the first instance");

  CLI::App* train = app.add_subcommand("train", "train a dispatching policy");

  CLI::App* eval = app.add_subcommand("eval", "evaluate policies on the test pool");
  std::vector<std::string> eval_specs;
  bool eval_trace = false;
  eval->add_option("--policy", eval_specs, "policy spec (repeatable)")
      ->required();
  eval->add_flag("--trace", eval_trace, "dump decision/route CSVs for day one");

  CLI::App* sweep = app.add_subcommand("sweep", "train+evaluate an alpha grid");
  std::vector<double> sweep_alphas;
  sweep->add_option("--alpha", sweep_alphas, "alpha value (repeatable)")
      ->required();

  CLI::App* bucket = app.add_subcommand("bucket-search",
                                        "tune the bucket policy threshold");

  CLI::App* longterm =
      app.add_subcommand("longterm", "year-long demand feedback simulation");
  std::vector<std::string> lt_specs;
  double lt_threshold = 0.70;
  int lt_months = 12;
  int lt_days = 30;
  longterm->add_option("--policy", lt_specs, "policy spec (repeatable)")
      ->required();
  longterm->add_option("--threshold", lt_threshold, "service-rate threshold");
  longterm->add_option("--months", lt_months, "months to simulate");
  longterm->add_option("--days", lt_days, "days per month");

  CLI::App* profile_cmd =
      app.add_subcommand("reward-profile", "per-minute rate-based reward profile");
  std::string profile_spec = "myopic";
  int profile_days = 500;
  profile_cmd->add_option("--policy", profile_spec, "policy spec");
  profile_cmd->add_option("--days", profile_days, "days to average over");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  args.seed_set = seed_opt->count() > 0;
  args.out_set = out_opt->count() > 0;
  gen_seed_set = gen_seed_opt->count() > 0;

  try {
    const sdd::RunConfig cfg = resolve_config(args);
    if (*gen) {
      sdd::cmd_gen(cfg, gen_count,
                   gen_seed_set ? gen_seed : cfg.pools.train_seed, cfg.out);
    } else if (*train) {
      sdd::cmd_train(cfg);
    } else if (*eval) {
      sdd::cmd_eval(cfg, eval_specs, args.jobs, eval_trace, cfg.out);
    } else if (*sweep) {
      sdd::cmd_sweep(cfg, sweep_alphas, args.jobs, cfg.out);
    } else if (*bucket) {
      sdd::cmd_bucket_search(cfg, cfg.out);
    } else if (*longterm) {
      sdd::cmd_longterm(cfg, lt_specs, lt_threshold, lt_months, lt_days,
                        cfg.out);
    } else if (*profile_cmd) {
      sdd::cmd_reward_profile(cfg, profile_spec, profile_days, cfg.out);
    }
  } catch (const sdd::config_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
