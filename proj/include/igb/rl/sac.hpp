#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "igb/diff/adam.hpp"
#include "igb/diff/layers.hpp"
#include "igb/lossbal/weights.hpp"
#include "igb/rl/replay_buffer.hpp"

namespace igb::rl {

struct SacConfig {
  std::size_t hidden = 64;           // width of both hidden layers, actor and critics
  std::size_t update_batch = 256;
  double gamma = 0.99;
  double tau = 0.005;
  double entropy_temperature = 0.2;  // initial value when auto-tuned
  bool auto_entropy = false;
  double lr = 3e-4;
  std::size_t updates_per_round = 1;
  double log_std_min = -20.0;
  double log_std_max = 2.0;

  void validate() const;
};

struct SacDiagnostics {
  bool skipped = false;  // buffer smaller than update_batch
  double critic1_loss = 0.0;
  double critic2_loss = 0.0;
  double actor_loss = 0.0;
  double entropy = 0.0;
  double alpha = 0.0;
};

/// Soft actor-critic whose actions are task weights.
///
/// The actor emits a Gaussian over n pre-squash dimensions; a sample z is
/// squashed to u = tanh(z) and mapped to lambda = n * softmax(u). Log
/// probabilities and entropy are those of u (tanh-squashed Gaussian). Twin
/// critics score (state, lambda) pairs.
class SacAgent {
 public:
  SacAgent(std::size_t tasks, SacConfig config, std::uint64_t seed);

  std::size_t task_count() const { return tasks_; }
  const SacConfig& config() const { return config_; }
  double alpha() const;

  lossbal::WeightDecision select_action(std::span<const double> state, bool deterministic);

  // One training round (updates_per_round gradient steps per network).
  SacDiagnostics update(const ReplayBuffer& buffer);

  // Overwrites both targets with (1 - tau) * target + tau * critic.
  void soft_update_targets(double tau);

  diff::Mlp& actor() { return actor_; }
  diff::Mlp& critic(std::size_t k) { return k == 0 ? critic1_ : critic2_; }
  diff::Mlp& target(std::size_t k) { return k == 0 ? target1_ : target2_; }
  std::vector<double> parameter_snapshot() const;  // actor, critics, targets, log alpha
  std::mt19937_64& rng() { return rng_; }

 private:
  SacDiagnostics train_step(const ReplayBuffer& buffer);

  std::size_t tasks_;
  SacConfig config_;
  std::mt19937_64 rng_;
  diff::Mlp actor_, critic1_, critic2_, target1_, target2_;
  diff::Adam actor_opt_, critic1_opt_, critic2_opt_, alpha_opt_;
  diff::Tensor log_alpha_;
  double target_entropy_;
};

}  // namespace igb::rl
