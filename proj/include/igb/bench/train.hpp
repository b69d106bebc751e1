#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "igb/bench/config.hpp"
#include "igb/bench/record.hpp"
#include "igb/lossbal/strategy.hpp"
#include "igb/mtl/synthetic.hpp"

namespace igb::bench {

/// Single-task baseline metrics, one entry per task.
struct StlReference {
  std::vector<double> validation;  // best validation metric of each single-task run
  std::vector<double> test;        // test metric of the selected single-task model
  std::vector<bool> higher_is_better;
  double train_seconds = 0.0;      // summed over the single-task runs
};

/// Seeds derived from a run seed; the data and initial weights depend only on
/// the run seed, so every method of a seed sees the same problem.
struct RunSeeds {
  std::uint64_t suite, model, strategy, aggregator, shuffle;
};
RunSeeds derive_seeds(std::uint64_t seed);

/// Trains `method` on `suite` and returns the full log.
///
/// Per epoch: set the scheduled lr, iterate the shuffled batches, get lambda
/// from the strategy, update through loss balancing (or combine_step when an
/// aggregator is set), then evaluate on validation. The model with the best
/// validation score (delta_m against `stl`, or against the first epoch when no
/// reference is given) is evaluated once on test. A non-finite loss stops the
/// run with `aborted` set.
RunRecord train_method(const ExperimentConfig& config, const mtl::SyntheticSuite& suite, const MethodSpec& method,
                       std::uint64_t seed, const StlReference* stl = nullptr);

// The configured method on a freshly generated suite.
RunRecord train_run(const ExperimentConfig& config, std::uint64_t seed, const StlReference* stl = nullptr);

/// One equal-weighted single-task run per task, same architecture and budget.
StlReference train_stl(const ExperimentConfig& config, const mtl::SyntheticSuite& suite, std::uint64_t seed,
                       std::vector<RunRecord>* records = nullptr);

// Label used for the single-task record of `task` (counted from 1).
std::string stl_label(std::size_t task);

// CPU time consumed by the calling thread, in seconds.
double thread_cpu_seconds();

}  // namespace igb::bench
