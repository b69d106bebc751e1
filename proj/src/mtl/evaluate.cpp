#include "igb/mtl/evaluate.hpp"

#include "igb/diff/ops.hpp"

namespace igb::mtl {

TaskMetrics evaluate(MultiTaskModel& model, const Split& split) {
  Tape tape;
  auto preds = model.forward(tape, split.inputs);
  TaskBatch batch{split.inputs, split.targets, 1, 1};
  const auto losses = task_losses(preds, batch, model.head_specs());

  TaskMetrics out;
  out.losses = losses.values;
  for (std::size_t k = 0; k < model.task_count(); ++k) {
    const auto& spec = model.head_specs()[k];
    if (spec.kind == TaskKind::Regression) {
      out.values.push_back(losses.values[k]);
      out.higher_is_better.push_back(false);
      continue;
    }
    const Tensor& logits = preds[k].value();
    const std::size_t rows = logits.rows(), classes = logits.cols();
    std::size_t correct = 0;
    for (std::size_t r = 0; r < rows; ++r) {
      std::size_t best = 0;
      for (std::size_t c = 1; c < classes; ++c)
        if (logits.at(r, c) > logits.at(r, best)) best = c;
      if (best == static_cast<std::size_t>(split.targets[k][r])) ++correct;
    }
    out.values.push_back(static_cast<double>(correct) / static_cast<double>(rows));
    out.higher_is_better.push_back(true);
  }
  return out;
}

}  // namespace igb::mtl
