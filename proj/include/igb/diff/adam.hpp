#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "igb/diff/tensor.hpp"

namespace igb::diff {

struct AdamOptions {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  void validate() const;
};

struct AdamState {
  std::size_t step = 0;
  std::vector<double> m;
  std::vector<double> v;
  AdamOptions options;

  explicit AdamState(std::size_t length = 0, AdamOptions opts = {});
};

/// One bias-corrected Adam update of `params` in place.
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state);

/// Adam over an ordered list of parameter tensors.
///
/// Moment buffers are matched to parameters by position, so a model copy can
/// keep using the same optimizer as long as its parameter order is unchanged.
class Adam {
 public:
  explicit Adam(AdamOptions options = {});

  void step(std::span<Tensor* const> params);
  void set_lr(double lr);
  double lr() const { return options_.lr; }
  std::size_t steps() const { return steps_; }

 private:
  AdamOptions options_;
  std::vector<AdamState> states_;
  std::size_t steps_ = 0;
};

void zero_grads(std::span<Tensor* const> params);

/// Step decay: lr(epoch) = initial_lr * decay_factor^floor((epoch - 1) / decay_every_epochs).
struct LrSchedule {
  double initial_lr = 1e-3;
  double decay_factor = 1.0;
  std::size_t decay_every_epochs = 100;

  void validate() const;
  double lr(std::size_t epoch) const;  // epochs count from 1
};

}  // namespace igb::diff
