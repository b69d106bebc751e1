#pragma once

#include <vector>

#include "igb/mtl/model.hpp"
#include "igb/mtl/synthetic.hpp"

namespace igb::mtl {

/// Per-task evaluation metrics on a data split.
struct TaskMetrics {
  std::vector<double> values;         // MSE (regression) or accuracy (classification)
  std::vector<bool> higher_is_better;
  std::vector<double> losses;         // training-objective loss per task
};

TaskMetrics evaluate(MultiTaskModel& model, const Split& split);

}  // namespace igb::mtl
