// Command line front end: config-driven experiment runner with the
// subcommands run, table1, curves and check.

#include "etgp/experiments.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <string>

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int trials = 0;
  bool trials_set = false;
  long horizon = 0;
  bool horizon_set = false;
  bool quiet = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "experiment config file")
      ->required();
  cmd->add_option("--out", args.out_dir, "output directory override");
  cmd->add_option("--seed", args.seed, "base seed override")
      ->each([&args](const std::string&) { args.seed_set = true; });
  cmd->add_option("--trials", args.trials, "trial count override")
      ->each([&args](const std::string&) { args.trials_set = true; });
  cmd->add_option("--horizon", args.horizon, "horizon override")
      ->each([&args](const std::string&) { args.horizon_set = true; });
  cmd->add_flag("--quiet", args.quiet, "suppress progress output");
}

etgp::ExperimentConfig load(const CommonArgs& args) {
  etgp::ExperimentConfig cfg = etgp::parse_config_file(args.config_path);
  if (!args.out_dir.empty()) cfg.output.dir = args.out_dir;
  return cfg;
}

etgp::RunOverrides overrides(const CommonArgs& args) {
  etgp::RunOverrides ov;
  if (args.seed_set) ov.seed = args.seed;
  if (args.trials_set) ov.trials = args.trials;
  if (args.horizon_set) ov.horizon = args.horizon;
  return ov;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"event-triggered gradient-push experiment runner"};
  app.require_subcommand(1);

  CommonArgs run_args, table_args, curves_args, check_args;
  CLI::App* cmd_run = app.add_subcommand("run", "single run with exports");
  add_common(cmd_run, run_args);
  CLI::App* cmd_table = app.add_subcommand(
      "table1", "trigger/termination table over a (tau, zeta) grid");
  add_common(cmd_table, table_args);
  CLI::App* cmd_curves =
      app.add_subcommand("curves", "R_f / R_c series per schedule variant");
  add_common(cmd_curves, curves_args);
  CLI::App* cmd_check =
      app.add_subcommand("check", "assumption verdicts and invariant suite");
  add_common(cmd_check, check_args);

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_run->parsed()) {
      etgp::cmd_run(load(run_args), overrides(run_args), run_args.quiet,
                    std::cout);
    } else if (cmd_table->parsed()) {
      etgp::ExperimentConfig cfg = load(table_args);
      etgp::Table1Result res = etgp::run_table1(cfg, overrides(table_args));
      std::filesystem::path dir(cfg.output.dir);
      etgp::write_table1_csv(res, dir / "table1.csv");
      if (!table_args.quiet) {
        for (const auto& c : res.cells) {
          std::cout << "tau=" << c.tau.to_string()
                    << " zeta=" << c.zeta.to_string()
                    << ": Nx=" << etgp::format_double(c.nx_mean)
                    << " Ny=" << etgp::format_double(c.ny_mean)
                    << " kf=" << etgp::format_double(c.kf_mean);
          if (c.capped > 0) std::cout << " (" << c.capped << " capped)";
          std::cout << '\n';
        }
        std::cout << "outputs in " << dir.string() << '\n';
      }
    } else if (cmd_curves->parsed()) {
      etgp::ExperimentConfig cfg = load(curves_args);
      auto res = etgp::run_curves(cfg, overrides(curves_args));
      std::filesystem::path dir(cfg.output.dir);
      etgp::write_curves_csv(res, dir);
      if (!curves_args.quiet)
        std::cout << res.size() << " variant series written to " << dir.string()
                  << '\n';
    } else if (cmd_check->parsed()) {
      etgp::ExperimentConfig cfg = load(check_args);
      etgp::CheckReport rep = etgp::run_check(cfg);
      etgp::print_check_report(rep, std::cout);
      return rep.invariants_ok ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
