#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "igb/diff/layers.hpp"
#include "igb/diff/ops.hpp"
#include "igb/lossbal/weights.hpp"
#include "igb/mtl/model.hpp"

namespace igb::testing {

inline mtl::TaskBatch random_batch(std::size_t rows, std::size_t dim, std::size_t tasks, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  mtl::TaskBatch b;
  std::vector<double> x(rows * dim);
  for (auto& v : x) v = normal(rng);
  b.inputs = diff::Tensor({rows, dim}, x);
  for (std::size_t k = 0; k < tasks; ++k) {
    std::vector<double> y(rows);
    for (auto& v : y) v = normal(rng);
    b.targets.push_back(diff::Tensor({rows, 1}, y));
  }
  return b;
}

enum class TotalKind { ScaleInvariant, WeightedSum };

// All model gradients of the total loss with task i's loss multiplied by factors[i].
inline std::vector<double> rescaled_gradients(mtl::MultiTaskModel& model, const mtl::TaskBatch& batch,
                                              const std::vector<double>& lambda, const std::vector<double>& factors,
                                              TotalKind kind) {
  diff::Tape tape;
  auto losses = mtl::task_losses(model, tape, batch);
  for (std::size_t i = 0; i < losses.size(); ++i) {
    losses.terms[i] = diff::scale(losses.terms[i], factors[i]);
    losses.values[i] = losses.terms[i].item();
  }
  model.zero_grad();
  const lossbal::WeightDecision w{lambda};
  tape.backward(kind == TotalKind::ScaleInvariant ? lossbal::total_loss_si(losses, w)
                                                  : lossbal::total_loss_weighted_sum(losses, w));
  return diff::flatten_grads(model.parameters());
}

// |a - b| / max(|a|, |b|).
inline double relative_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double num = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  const double scale = std::sqrt(std::max(na, nb));
  return scale == 0.0 ? std::sqrt(num) : std::sqrt(num) / scale;
}

// Worst norm-wise relative error between backprop and central differences of
// the summed task losses, over every parameter tensor of the model.
inline double model_gradcheck(mtl::MultiTaskModel& model, const mtl::TaskBatch& batch, double h = 1e-6) {
  auto total = [&](diff::Tape& tape) {
    auto l = mtl::task_losses(model, tape, batch);
    diff::Var s = l.terms[0];
    for (std::size_t i = 1; i < l.size(); ++i) s = diff::add(s, l.terms[i]);
    return s;
  };
  {
    diff::Tape tape;
    model.zero_grad();
    tape.backward(total(tape));
  }
  double worst = 0.0;
  for (auto* p : model.parameters()) {
    double diff2 = 0.0, a2 = 0.0, b2 = 0.0;
    for (std::size_t j = 0; j < p->numel(); ++j) {
      const double keep = p->data()[j];
      p->data()[j] = keep + h;
      diff::Tape up_tape;
      const double up = total(up_tape).item();
      p->data()[j] = keep - h;
      diff::Tape down_tape;
      const double down = total(down_tape).item();
      p->data()[j] = keep;
      const double fd = (up - down) / (2.0 * h), g = p->grad()[j];
      diff2 += (g - fd) * (g - fd);
      a2 += g * g;
      b2 += fd * fd;
    }
    worst = std::max(worst, std::sqrt(diff2) / std::max(std::sqrt(std::max(a2, b2)), 1e-12));
  }
  return worst;
}

// Direct n * softmax(z) without the max shift.
inline std::vector<double> direct_scaled_softmax(const std::vector<double>& z) {
  double s = 0.0;
  for (double v : z) s += std::exp(v);
  std::vector<double> out;
  for (double v : z) out.push_back(static_cast<double>(z.size()) * std::exp(v) / s);
  return out;
}

}  // namespace igb::testing
