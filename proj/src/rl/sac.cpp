#include "igb/rl/sac.hpp"

#include <cmath>
#include <string>

#include "igb/diff/ops.hpp"
#include "igb/errors.hpp"

namespace igb::rl {

using diff::Tape;
using diff::Tensor;
using diff::Var;

void SacConfig::validate() const {
  if (hidden == 0) throw ConfigError("sac: hidden width must be positive");
  if (update_batch == 0) throw ConfigError("sac: update_batch must be positive");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("sac: gamma must lie in [0,1]");
  if (!(tau > 0.0 && tau <= 1.0)) throw ConfigError("sac: tau must lie in (0,1]");
  if (!(entropy_temperature > 0.0)) throw ConfigError("sac: entropy_temperature must be positive");
  if (!(lr > 0.0)) throw ConfigError("sac: lr must be positive");
  if (updates_per_round == 0) throw ConfigError("sac: updates_per_round must be positive");
  if (!(log_std_min < log_std_max)) throw ConfigError("sac: log_std_min must be below log_std_max");
}

namespace {

struct PolicySample {
  Var action;    // [B, n], n * softmax(tanh(z))
  Var log_prob;  // [B, 1], log density of tanh(z)
};

PolicySample sample_policy(Tape& tape, diff::Mlp& actor, const Tensor& states, const Tensor& noise,
                           const SacConfig& cfg) {
  const std::size_t n = states.cols();
  Var out = actor.forward(tape, tape.constant(states));
  Var mean = diff::slice_cols(out, 0, n);
  Var log_std = diff::clamp(diff::slice_cols(out, n, 2 * n), cfg.log_std_min, cfg.log_std_max);
  Var z = diff::add(mean, diff::mul(diff::exp(log_std), tape.constant(noise)));
  Var u = diff::tanh(z);
  // Change of variables for the tanh squash; 1e-6 keeps the log finite at saturation.
  Var log_det = diff::row_sum(diff::log(diff::shift(diff::scale(diff::square(u), -1.0), 1.0 + 1e-6)));
  Var log_prob = diff::sub(diff::gaussian_log_prob(z, mean, log_std), log_det);
  Var action = diff::scale(diff::softmax(u), static_cast<double>(n));
  return {action, log_prob};
}

Tensor standard_normal(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> v(rows * cols);
  for (auto& x : v) x = normal(rng);
  return Tensor({rows, cols}, std::move(v));
}

Var critic_value(Tape& tape, diff::Mlp& critic, const Tensor& states, Var actions) {
  return critic.forward(tape, diff::concat_cols(tape.constant(states), actions));
}

void copy_parameters(diff::Mlp& from, diff::Mlp& to) {
  auto src = from.parameters();
  auto dst = to.parameters();
  for (std::size_t i = 0; i < src.size(); ++i) {
    std::copy(src[i]->data().begin(), src[i]->data().end(), dst[i]->data().begin());
  }
}

}  // namespace

SacAgent::SacAgent(std::size_t tasks, SacConfig config, std::uint64_t seed)
    : tasks_(tasks),
      config_(config),
      rng_(seed),
      actor_opt_({config.lr}),
      critic1_opt_({config.lr}),
      critic2_opt_({config.lr}),
      alpha_opt_({config.lr}),
      log_alpha_({1}, {std::log(config.entropy_temperature)}, true),
      target_entropy_(-static_cast<double>(tasks)) {
  if (tasks < 1) throw ConfigError("sac: need at least one task");
  config_.validate();
  const std::size_t h = config_.hidden;
  actor_ = diff::Mlp({tasks, h, h, 2 * tasks}, false, rng_);
  critic1_ = diff::Mlp({2 * tasks, h, h, 1}, false, rng_);
  critic2_ = diff::Mlp({2 * tasks, h, h, 1}, false, rng_);
  target1_ = critic1_;
  target2_ = critic2_;
}

double SacAgent::alpha() const { return std::exp(log_alpha_[0]); }

lossbal::WeightDecision SacAgent::select_action(std::span<const double> state, bool deterministic) {
  if (state.size() != tasks_) {
    throw ContractError("select_action: state has " + std::to_string(state.size()) + " entries, expected " +
                        std::to_string(tasks_));
  }
  for (double s : state) {
    if (!std::isfinite(s)) throw ContractError("select_action: state is not finite");
  }
  Tape tape;
  Tensor s({1, tasks_}, std::vector<double>(state.begin(), state.end()));
  Tensor noise = deterministic ? Tensor::zeros({1, tasks_}) : standard_normal(1, tasks_, rng_);
  auto sample = sample_policy(tape, actor_, s, noise, config_);
  const auto a = sample.action.value().data();
  return lossbal::WeightDecision{std::vector<double>(a.begin(), a.end())};
}

SacDiagnostics SacAgent::update(const ReplayBuffer& buffer) {
  if (buffer.size() < config_.update_batch) {
    SacDiagnostics d;
    d.skipped = true;
    d.alpha = alpha();
    return d;
  }
  SacDiagnostics last;
  for (std::size_t k = 0; k < config_.updates_per_round; ++k) last = train_step(buffer);
  return last;
}

SacDiagnostics SacAgent::train_step(const ReplayBuffer& buffer) {
  const std::size_t B = config_.update_batch, n = tasks_;
  const auto idx = buffer.sample_indices(B, rng_);
  std::vector<double> s(B * n), a(B * n), s2(B * n), r(B);
  for (std::size_t i = 0; i < B; ++i) {
    const Transition& t = buffer.at(idx[i]);
    if (t.state.size() != n) throw ContractError("sac update: transition arity differs from agent");
    std::copy(t.state.begin(), t.state.end(), s.begin() + static_cast<std::ptrdiff_t>(i * n));
    std::copy(t.action.begin(), t.action.end(), a.begin() + static_cast<std::ptrdiff_t>(i * n));
    std::copy(t.next_state.begin(), t.next_state.end(), s2.begin() + static_cast<std::ptrdiff_t>(i * n));
    r[i] = t.reward;
  }
  const Tensor states({B, n}, s), actions({B, n}, a), next_states({B, n}, s2);
  const double alpha_now = alpha();
  SacDiagnostics diag;

  // Soft Bellman targets from the target critics and a fresh next action.
  std::vector<double> y(B);
  {
    Tape tape;
    auto next = sample_policy(tape, actor_, next_states, standard_normal(B, n, rng_), config_);
    Var q1 = critic_value(tape, target1_, next_states, next.action);
    Var q2 = critic_value(tape, target2_, next_states, next.action);
    const auto q1v = q1.value().data(), q2v = q2.value().data(), lp = next.log_prob.value().data();
    for (std::size_t i = 0; i < B; ++i) {
      y[i] = r[i] + config_.gamma * (std::min(q1v[i], q2v[i]) - alpha_now * lp[i]);
    }
  }

  {
    Tape tape;
    Var target = tape.constant(Tensor({B, 1}, y));
    Var act = tape.constant(actions);
    Var loss1 = diff::mse(critic_value(tape, critic1_, states, act), target);
    Var loss2 = diff::mse(critic_value(tape, critic2_, states, act), target);
    auto p1 = critic1_.parameters();
    auto p2 = critic2_.parameters();
    diff::zero_grads(p1);
    diff::zero_grads(p2);
    tape.backward(diff::add(loss1, loss2));
    critic1_opt_.step(p1);
    critic2_opt_.step(p2);
    diag.critic1_loss = loss1.item();
    diag.critic2_loss = loss2.item();
  }

  double mean_log_prob = 0.0;
  {
    Tape tape;
    auto pi = sample_policy(tape, actor_, states, standard_normal(B, n, rng_), config_);
    Var q = diff::minimum(critic_value(tape, critic1_, states, pi.action),
                          critic_value(tape, critic2_, states, pi.action));
    Var loss = diff::mean(diff::sub(diff::scale(pi.log_prob, alpha_now), q));
    auto pa = actor_.parameters();
    diff::zero_grads(pa);
    tape.backward(loss);
    actor_opt_.step(pa);
    diag.actor_loss = loss.item();
    for (double v : pi.log_prob.value().data()) mean_log_prob += v;
    mean_log_prob /= static_cast<double>(B);
  }
  // The actor pass leaves gradients on the critics; they are cleared before every critic step.

  if (config_.auto_entropy) {
    // d/d(log alpha) of -log_alpha * (log_prob + target_entropy), averaged.
    log_alpha_.grad()[0] = -(mean_log_prob + target_entropy_);
    std::vector<Tensor*> pa{&log_alpha_};
    alpha_opt_.step(pa);
  }

  soft_update_targets(config_.tau);
  diag.entropy = -mean_log_prob;
  diag.alpha = alpha();
  return diag;
}

void SacAgent::soft_update_targets(double tau) {
  if (tau == 1.0) {
    copy_parameters(critic1_, target1_);
    copy_parameters(critic2_, target2_);
    return;
  }
  for (std::size_t k = 0; k < 2; ++k) {
    auto src = critic(k).parameters();
    auto dst = target(k).parameters();
    for (std::size_t i = 0; i < src.size(); ++i) {
      auto sv = src[i]->data();
      auto dv = dst[i]->data();
      for (std::size_t j = 0; j < sv.size(); ++j) dv[j] = (1.0 - tau) * dv[j] + tau * sv[j];
    }
  }
}

std::vector<double> SacAgent::parameter_snapshot() const {
  std::vector<double> out;
  for (const diff::Mlp* net : {&actor_, &critic1_, &critic2_, &target1_, &target2_}) {
    auto v = net->flat_values();
    out.insert(out.end(), v.begin(), v.end());
  }
  out.push_back(log_alpha_[0]);
  return out;
}

}  // namespace igb::rl
