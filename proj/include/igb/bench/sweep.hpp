#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "igb/bench/config.hpp"
#include "igb/bench/record.hpp"
#include "igb/bench/report.hpp"

namespace igb::bench {

struct SweepOptions {
  std::optional<std::filesystem::path> out_dir;  // resolve_output_dir(config) when unset
  bool write_files = true;
  std::function<void(const std::string&)> progress;  // one line per finished run
};

struct SweepResult {
  std::vector<RunRecord> records;  // per seed: single-task runs, then methods in order
  MetricReport report;
  std::filesystem::path out_dir;
};

// Methods a sweep trains: the config's sweep list (or its single method), with
// EW added first when missing since T is measured against it.
std::vector<MethodSpec> sweep_methods(const ExperimentConfig& config);

/// For every seed: single-task baselines, then each method on the same data.
/// Seeds run on `config.jobs` threads; the result does not depend on the
/// thread count. Writes runs/*.csv plus the report files when asked.
SweepResult run_sweep(const ExperimentConfig& config, const SweepOptions& options = {});

// Records of one seed, in sweep order.
std::vector<RunRecord> run_seed(const ExperimentConfig& config, const std::vector<MethodSpec>& methods,
                                std::uint64_t seed);

}  // namespace igb::bench
