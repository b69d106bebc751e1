#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "igb/mtl/model.hpp"

namespace igb::mtl {

struct TaskSpec {
  double scale = 1.0;       // multiplies the clean target
  unsigned degree = 1;      // polynomial degree of the target function
  double noise = 0.1;       // noise std, relative to the unit-variance clean target
  TaskKind kind = TaskKind::Regression;
  std::size_t classes = 0;  // classification only
};

struct SuiteConfig {
  std::vector<TaskSpec> tasks;
  std::size_t input_dim = 16;
  std::size_t feature_dim = 8;   // shared random linear features every task reads
  std::size_t components = 4;    // ridge terms summed into each target
  bool shared_directions = true; // every task reads the same ridge directions
  std::size_t samples = 4000;    // split 70/15/15 into train/validation/test
  std::size_t batch_size = 64;
  ModelShape model{};            // input_dim is filled from this config

  void validate() const;
  // Three regression tasks, scales {1, 10, 100}, hardest task on the smallest scale.
  static SuiteConfig scaled_default();
};

struct Split {
  Tensor inputs;                    // [rows, input_dim]
  std::vector<Tensor> targets;      // per task [rows, 1]
  std::vector<Tensor> clean;        // targets before noise (regression) or raw scores
  std::size_t rows() const { return inputs.rows(); }
};

/// Deterministic multi-task regression/classification problem.
///
/// Task k reads the shared features h = W x and targets
/// scale_k * f_k(h) + noise, with f_k a sum of normalized Hermite ridge
/// functions of degree_k. Higher degree means a harder task.
class SyntheticSuite {
 public:
  SyntheticSuite(SuiteConfig config, std::uint64_t seed);

  const SuiteConfig& config() const { return config_; }
  std::uint64_t seed() const { return seed_; }
  std::size_t task_count() const { return config_.tasks.size(); }
  const Split& train() const { return train_; }
  const Split& validation() const { return validation_; }
  const Split& test() const { return test_; }

  std::vector<TaskHeadSpec> head_specs() const;
  MultiTaskModel make_model(std::uint64_t seed) const;

  std::size_t batches_per_epoch() const;
  // Shuffled training batches for one epoch; the last batch may be short.
  std::vector<TaskBatch> epoch_batches(std::size_t epoch, std::mt19937_64& rng) const;

  // The same data restricted to a single task (single-task baselines).
  SyntheticSuite single_task(std::size_t task) const;

 private:
  SyntheticSuite() = default;

  SuiteConfig config_;
  std::uint64_t seed_ = 0;
  Split train_, validation_, test_;
};

// Normalized probabilists' Hermite polynomial He_d(z) / sqrt(d!).
double hermite_normalized(unsigned degree, double z);

}  // namespace igb::mtl
