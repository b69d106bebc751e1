#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "igb/diff/layers.hpp"
#include "igb/diff/tape.hpp"

namespace igb::mtl {

using diff::Tape;
using diff::Tensor;
using diff::Var;

enum class TaskKind { Regression, Classification };

struct TaskHeadSpec {
  TaskKind kind = TaskKind::Regression;
  std::size_t outputs = 1;  // class count for classification
};

struct ModelShape {
  std::size_t input_dim = 0;
  std::vector<std::size_t> trunk_widths{64, 64};
  std::size_t head_width = 32;
};

/// Shared trunk (parameters theta) feeding one head per task (parameters psi_i).
class MultiTaskModel {
 public:
  MultiTaskModel(const ModelShape& shape, std::vector<TaskHeadSpec> heads, std::uint64_t seed);

  // One prediction tensor per task, each [batch, outputs_i].
  std::vector<Var> forward(Tape& tape, const Tensor& inputs);

  std::size_t task_count() const { return heads_.size(); }
  const std::vector<TaskHeadSpec>& head_specs() const { return specs_; }

  std::vector<Tensor*> shared_parameters();
  std::vector<Tensor*> task_parameters(std::size_t task);
  // Shared parameters first, then each head in task order.
  std::vector<Tensor*> parameters();
  void zero_grad();

 private:
  diff::Mlp trunk_;
  std::vector<diff::Mlp> heads_;
  std::vector<TaskHeadSpec> specs_;
};

struct TaskBatch {
  Tensor inputs;                // [batch, input_dim]
  std::vector<Tensor> targets;  // per task [batch, 1]; class index for classification tasks
  std::size_t epoch_index = 1;
  std::size_t batch_index = 1;
};

/// Per-task scalar losses of one batch, each attached to the tape.
struct LossVector {
  std::vector<Var> terms;
  std::vector<double> values;
  std::size_t clamped = 0;  // losses raised to the floor in this batch

  std::size_t size() const { return values.size(); }
};

inline constexpr double kLossFloor = 1e-12;

// MSE for regression heads, cross-entropy for classification heads; each loss
// is clamped below at kLossFloor.
LossVector task_losses(MultiTaskModel& model, Tape& tape, const TaskBatch& batch);

// Same as above with predictions already computed on `tape`.
LossVector task_losses(std::span<const Var> predictions, const TaskBatch& batch,
                       const std::vector<TaskHeadSpec>& heads);

}  // namespace igb::mtl
