#include "igb/rl/reward.hpp"

#include <algorithm>

#include "igb/errors.hpp"

namespace igb::rl {

double compute_reward(std::span<const double> l_t, std::span<const double> l_next, const lossbal::BaselineLosses& base,
                      double lr_now, double lr_init, const RewardOptions& options) {
  const auto& lb = base.values();
  if (l_t.size() != lb.size() || l_next.size() != lb.size() || lb.empty()) {
    throw ShapeError("compute_reward: loss vectors and L_base differ in length");
  }
  if (!(lr_now > 0.0) || !(lr_init > 0.0)) throw ContractError("compute_reward: learning rates must be positive");

  double agg = options.use_min ? (l_t[0] - l_next[0]) / lb[0] : 0.0;
  for (std::size_t i = 0; i < lb.size(); ++i) {
    const double decline = (l_t[i] - l_next[i]) / lb[i];
    agg = options.use_min ? std::min(agg, decline) : agg + decline;
  }
  if (!options.use_min) agg /= static_cast<double>(lb.size());
  const double alpha = options.use_alpha ? lr_init / lr_now : 1.0;
  return alpha * agg;
}

}  // namespace igb::rl
