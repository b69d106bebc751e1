#pragma once

#include <span>

#include "igb/lossbal/weights.hpp"

namespace igb::rl {

/// Ablation switches for the reward.
struct RewardOptions {
  bool use_min = true;    // false: mean normalized decline instead of the minimum
  bool use_alpha = true;  // false: alpha fixed at 1
};

/// alpha * min_i((l_t_i - l_next_i) / l_base_i), alpha = lr_init / lr_now.
/// Negative when losses rose. Throws StateError if `base` is not captured.
double compute_reward(std::span<const double> l_t, std::span<const double> l_next, const lossbal::BaselineLosses& base,
                      double lr_now, double lr_init, const RewardOptions& options = {});

}  // namespace igb::rl
