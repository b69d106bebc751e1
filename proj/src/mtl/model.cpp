#include "igb/mtl/model.hpp"

#include <limits>
#include <random>
#include <span>
#include <string>

#include "igb/diff/adam.hpp"
#include "igb/diff/ops.hpp"
#include "igb/errors.hpp"

namespace igb::mtl {

MultiTaskModel::MultiTaskModel(const ModelShape& shape, std::vector<TaskHeadSpec> heads, std::uint64_t seed)
    : specs_(std::move(heads)) {
  if (shape.input_dim == 0) throw ConfigError("model input_dim must be positive");
  if (specs_.empty()) throw ConfigError("model needs at least one task head");
  if (shape.trunk_widths.empty()) throw ConfigError("model trunk needs at least one layer");
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> trunk{shape.input_dim};
  trunk.insert(trunk.end(), shape.trunk_widths.begin(), shape.trunk_widths.end());
  trunk_ = diff::Mlp(trunk, true, rng);
  for (const auto& spec : specs_) {
    if (spec.outputs == 0) throw ConfigError("task head needs at least one output");
    if (spec.kind == TaskKind::Classification && spec.outputs < 2) {
      throw ConfigError("classification head needs at least two classes");
    }
    heads_.emplace_back(std::vector<std::size_t>{trunk.back(), shape.head_width, spec.outputs}, false, rng);
  }
}

std::vector<Var> MultiTaskModel::forward(Tape& tape, const Tensor& inputs) {
  Var shared = trunk_.forward(tape, tape.constant(inputs));
  std::vector<Var> out;
  out.reserve(heads_.size());
  for (auto& head : heads_) out.push_back(head.forward(tape, shared));
  return out;
}

std::vector<Tensor*> MultiTaskModel::shared_parameters() { return trunk_.parameters(); }

std::vector<Tensor*> MultiTaskModel::task_parameters(std::size_t task) {
  if (task >= heads_.size()) throw ContractError("no task head " + std::to_string(task));
  return heads_[task].parameters();
}

std::vector<Tensor*> MultiTaskModel::parameters() {
  auto out = trunk_.parameters();
  for (auto& head : heads_) {
    auto p = head.parameters();
    out.insert(out.end(), p.begin(), p.end());
  }
  return out;
}

void MultiTaskModel::zero_grad() { diff::zero_grads(parameters()); }

LossVector task_losses(std::span<const Var> predictions, const TaskBatch& batch,
                       const std::vector<TaskHeadSpec>& heads) {
  if (predictions.size() != batch.targets.size() || heads.size() != predictions.size()) {
    throw ContractError("task_losses: model has " + std::to_string(predictions.size()) + " tasks but batch has " +
                        std::to_string(batch.targets.size()) + " targets");
  }
  LossVector out;
  for (std::size_t k = 0; k < predictions.size(); ++k) {
    Var pred = predictions[k];
    Tape& tape = pred.tape();
    const Tensor& target = batch.targets[k];
    if (target.rows() != batch.inputs.rows()) {
      throw ShapeError("task_losses: target " + std::to_string(k) + " batch dimension mismatch");
    }
    Var loss;
    if (heads[k].kind == TaskKind::Regression) {
      loss = diff::mse(pred, tape.constant(target));
    } else {
      std::vector<std::size_t> labels(target.numel());
      for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<std::size_t>(target[i]);
      loss = diff::cross_entropy(pred, labels);
    }
    if (loss.item() < kLossFloor) ++out.clamped;
    loss = diff::clamp(loss, kLossFloor, std::numeric_limits<double>::infinity());
    out.terms.push_back(loss);
    out.values.push_back(loss.item());
  }
  return out;
}

LossVector task_losses(MultiTaskModel& model, Tape& tape, const TaskBatch& batch) {
  if (model.task_count() != batch.targets.size()) {
    throw ContractError("task_losses: model has " + std::to_string(model.task_count()) + " tasks but batch has " +
                        std::to_string(batch.targets.size()) + " targets");
  }
  auto preds = model.forward(tape, batch.inputs);
  return task_losses(preds, batch, model.head_specs());
}

}  // namespace igb::mtl
