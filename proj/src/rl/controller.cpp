#include "igb/rl/controller.hpp"

#include <cmath>
#include <string>

#include "igb/errors.hpp"

namespace igb::rl {

void Igbv2Config::validate() const {
  if (update_e == 0 || use_e == 0) throw ConfigError("igbv2: update_e and use_e count epochs from 1");
  if (update_every == 0) throw ConfigError("igbv2: update_every must be positive");
  if (buffer_capacity == 0) throw ConfigError("igbv2: buffer capacity must be positive");
  sac.validate();
}

Igbv2Controller::Igbv2Controller(std::size_t tasks, Igbv2Config config, std::uint64_t seed)
    : tasks_(tasks), config_(std::move(config)), rng_(seed) {
  if (tasks == 0) throw ConfigError("igbv2: need at least one task");
  config_.validate();
}

std::vector<double> Igbv2Controller::state_of(std::span<const double> losses) const {
  std::vector<double> s(losses.begin(), losses.end());
  if (tracker_.base().captured()) {
    const auto& lb = tracker_.base().values();
    for (std::size_t i = 0; i < s.size(); ++i) s[i] /= lb[i];
  }
  return s;
}

Igbv2StepInfo Igbv2Controller::step(SacAgent& agent, ReplayBuffer& buffer, std::span<const double> losses,
                                    std::size_t epoch, std::size_t batch, std::size_t batches_per_epoch,
                                    double lr_now, double lr_init) {
  if (losses.size() != tasks_ || agent.task_count() != tasks_) {
    throw ContractError("igbv2_step: expected " + std::to_string(tasks_) + " losses");
  }
  for (double l : losses) {
    if (!std::isfinite(l)) throw ContractError("igbv2_step: non-finite loss");
  }
  const bool first = last_epoch_ == 0;
  const bool next_in_epoch = epoch == last_epoch_ && batch == last_batch_ + 1;
  const bool next_epoch = epoch == last_epoch_ + 1 && batch == 1 && last_batch_ == batches_per_epoch;
  if (batch == 0 || batch > batches_per_epoch || (first ? (epoch != 1 || batch != 1) : !(next_in_epoch || next_epoch))) {
    throw ContractError("igbv2_step: batch (" + std::to_string(epoch) + "," + std::to_string(batch) +
                        ") does not follow (" + std::to_string(last_epoch_) + "," + std::to_string(last_batch_) + ")");
  }
  last_epoch_ = epoch;
  last_batch_ = batch;
  ++global_batch_;

  Igbv2StepInfo info;
  tracker_.observe(losses, epoch, batch, batches_per_epoch);
  const auto state = state_of(losses);

  if (epoch > 2 && pending_) {
    Transition t;
    t.state = pending_->state;
    t.action = pending_->action;
    t.reward = compute_reward(pending_->losses, losses, tracker_.base(), lr_now, lr_init, config_.reward);
    t.next_state = state;
    info.reward = t.reward;
    buffer.push(std::move(t));
  }

  if (epoch >= config_.update_e && global_batch_ % config_.update_every == 0) {
    info.train_attempted = true;
    info.diagnostics = agent.update(buffer);
    info.trained = !info.diagnostics.skipped;
  }

  if (epoch < config_.use_e) {
    info.weights = lossbal::rlw_weights(tasks_, rng_);
    info.source = ActionSource::Random;
  } else {
    info.weights = agent.select_action(state, config_.deterministic_actions);
    info.source = ActionSource::Actor;
  }

  pending_ = Pending{std::vector<double>(losses.begin(), losses.end()), state, info.weights.lambda};
  return info;
}

Igbv2Strategy::Igbv2Strategy(std::size_t tasks, Igbv2Config config, std::uint64_t seed, lossbal::Objective objective)
    : LossBalancer(lossbal::StrategyKind::IGBv2, tasks, objective),
      agent_(tasks, config.sac, seed ^ 0x5AC5AC5AC5AC5AC5ULL),
      buffer_(config.buffer_capacity),
      controller_(tasks, config, seed) {}

lossbal::WeightDecision Igbv2Strategy::weights(const mtl::LossVector& losses, const lossbal::BatchContext& ctx) {
  check_losses(losses);
  last_ = controller_.step(agent_, buffer_, losses.values, ctx.epoch, ctx.batch, ctx.batches_per_epoch, ctx.lr,
                           ctx.initial_lr);
  return last_.weights;
}

}  // namespace igb::rl
