// igbench: train, compare, and report multi-task balancing methods on synthetic suites.
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "igb/bench/config.hpp"
#include "igb/bench/report.hpp"
#include "igb/bench/selftest.hpp"
#include "igb/bench/sweep.hpp"
#include "igb/errors.hpp"

namespace {

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> strategy;
  std::optional<std::string> aggregator;
  std::optional<std::size_t> epochs;
};

void add_overrides(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--seed", o.seed, "Run a single seed instead of the configured list");
  cmd->add_option("--out", o.out, "Output directory");
  cmd->add_option("--strategy", o.strategy, "Loss-balancing strategy (EW, SI, RLW, DWA, UW, IGBv1, IGBv2)");
  cmd->add_option("--aggregator", o.aggregator, "Gradient aggregator (mean, MGDA, PCGrad)");
  cmd->add_option("--epochs", o.epochs, "Training epochs");
}

igb::bench::ExperimentConfig load(const std::string& path, const Overrides& o) {
  auto cfg = igb::bench::load_config(path);
  if (o.seed) cfg.seeds = {*o.seed};
  if (o.out) cfg.output_dir = *o.out;
  if (o.epochs) cfg.epochs = *o.epochs;
  if (o.strategy) {
    cfg.method = igb::bench::parse_method(*o.strategy);
    cfg.sweep.clear();
  }
  if (o.aggregator) cfg.method.aggregator = igb::gradbal::parse_aggregator(*o.aggregator);
  cfg.validate();
  return cfg;
}

int run(igb::bench::ExperimentConfig cfg, bool single_method) {
  if (single_method) cfg.sweep.clear();
  igb::bench::SweepOptions opts;
  opts.progress = [](const std::string& line) { std::cerr << line << "\n"; };
  auto result = igb::bench::run_sweep(cfg, opts);
  std::cout << igb::bench::format_table(result.report);
  std::cout << "records written to " << result.out_dir.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-task loss and gradient balancing benchmark"};
  app.require_subcommand(1);

  std::string run_path, sweep_path, report_dir;
  Overrides run_o, sweep_o;

  auto* run_cmd = app.add_subcommand("run", "Train one method on every configured seed");
  run_cmd->add_option("config", run_path, "Experiment config (JSON)")->required();
  add_overrides(run_cmd, run_o);

  auto* sweep_cmd = app.add_subcommand("sweep", "Train every method of the config's sweep list and tabulate");
  sweep_cmd->add_option("config", sweep_path, "Experiment config (JSON)")->required();
  add_overrides(sweep_cmd, sweep_o);

  auto* report_cmd = app.add_subcommand("report", "Aggregate run records into tables and loss curves");
  report_cmd->add_option("dir", report_dir, "Directory holding run records")->required();

  auto* selftest_cmd = app.add_subcommand("selftest", "Run the built-in invariant checks");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) return run(load(run_path, run_o), true);
    if (*sweep_cmd) return run(load(sweep_path, sweep_o), false);
    if (*report_cmd) {
      auto records = igb::bench::load_records(report_dir);
      auto rep = igb::bench::write_report(report_dir, records);
      std::cout << igb::bench::format_table(rep);
      return 0;
    }
    if (*selftest_cmd) {
      return igb::bench::print_selftest(igb::bench::run_selftest(), std::cout) ? 0 : 1;
    }
  } catch (const igb::ConfigError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
