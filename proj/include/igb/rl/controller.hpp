#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "igb/lossbal/strategy.hpp"
#include "igb/rl/replay_buffer.hpp"
#include "igb/rl/reward.hpp"
#include "igb/rl/sac.hpp"

namespace igb::rl {

struct Igbv2Config {
  std::size_t update_e = 4;        // first epoch with SAC training
  std::size_t use_e = 6;           // first epoch with actor-chosen weights
  std::size_t update_every = 50;   // batches between training rounds
  std::size_t buffer_capacity = 10000;
  bool deterministic_actions = false;
  RewardOptions reward;
  SacConfig sac;

  void validate() const;
};

enum class ActionSource { Random, Actor };

struct Igbv2StepInfo {
  lossbal::WeightDecision weights;
  ActionSource source = ActionSource::Random;
  std::optional<double> reward;   // reward of the transition pushed this step
  bool trained = false;           // a training round ran (and was not skipped)
  bool train_attempted = false;   // the cadence called for training
  SacDiagnostics diagnostics;
};

/// Per-batch schedule of IGBv2.
///
/// Each call: capture L_base at the last batch of epoch 2; from epoch 3 on,
/// close the pending transition with the incoming losses as its next state
/// and push it; from update_e on, train the agent every update_every global
/// batches; pick random weights before use_e and actor weights after; keep
/// (state, action) pending for the next call. States are losses divided by
/// L_base once it exists.
class Igbv2Controller {
 public:
  Igbv2Controller(std::size_t tasks, Igbv2Config config, std::uint64_t seed);

  Igbv2StepInfo step(SacAgent& agent, ReplayBuffer& buffer, std::span<const double> losses, std::size_t epoch,
                     std::size_t batch, std::size_t batches_per_epoch, double lr_now, double lr_init);

  const Igbv2Config& config() const { return config_; }
  const lossbal::BaselineLosses& base() const { return tracker_.base(); }
  std::size_t global_batch() const { return global_batch_; }
  // State vector for raw losses: normalized by L_base when captured.
  std::vector<double> state_of(std::span<const double> losses) const;

 private:
  struct Pending {
    std::vector<double> losses;
    std::vector<double> state;
    std::vector<double> action;
  };

  std::size_t tasks_;
  Igbv2Config config_;
  std::mt19937_64 rng_;
  lossbal::BaselineTracker tracker_;
  std::optional<Pending> pending_;
  std::size_t last_epoch_ = 0;
  std::size_t last_batch_ = 0;
  std::size_t global_batch_ = 0;
};

/// IGBv2 as a loss balancer: owns the agent, buffer, and controller.
class Igbv2Strategy final : public lossbal::LossBalancer {
 public:
  Igbv2Strategy(std::size_t tasks, Igbv2Config config, std::uint64_t seed,
                lossbal::Objective objective = lossbal::Objective::ScaleInvariant);

  lossbal::WeightDecision weights(const mtl::LossVector& losses, const lossbal::BatchContext& ctx) override;

  const Igbv2StepInfo& last_step() const { return last_; }
  SacAgent& agent() { return agent_; }
  const ReplayBuffer& buffer() const { return buffer_; }
  const Igbv2Controller& controller() const { return controller_; }

 private:
  SacAgent agent_;
  ReplayBuffer buffer_;
  Igbv2Controller controller_;
  Igbv2StepInfo last_;
};

}  // namespace igb::rl
