#include "igb/diff/adam.hpp"

#include <cmath>
#include <string>

#include "igb/errors.hpp"

namespace igb::diff {

void AdamOptions::validate() const {
  if (!(lr > 0.0)) throw ContractError("adam: lr must be positive, got " + std::to_string(lr));
  if (!(beta1 >= 0.0 && beta1 < 1.0)) throw ContractError("adam: beta1 must lie in [0,1)");
  if (!(beta2 >= 0.0 && beta2 < 1.0)) throw ContractError("adam: beta2 must lie in [0,1)");
  if (!(eps > 0.0)) throw ContractError("adam: eps must be positive");
}

AdamState::AdamState(std::size_t length, AdamOptions opts) : m(length, 0.0), v(length, 0.0), options(opts) {
  options.validate();
}

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state) {
  if (params.size() != grads.size() || params.size() != state.m.size() || state.m.size() != state.v.size()) {
    throw ContractError("adam_step: length mismatch (params " + std::to_string(params.size()) + ", grads " +
                        std::to_string(grads.size()) + ", state " + std::to_string(state.m.size()) + ")");
  }
  const auto& o = state.options;
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(o.beta1, t);
  const double c2 = 1.0 - std::pow(o.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = o.beta1 * state.m[i] + (1.0 - o.beta1) * grads[i];
    state.v[i] = o.beta2 * state.v[i] + (1.0 - o.beta2) * grads[i] * grads[i];
    const double m_hat = state.m[i] / c1;
    const double v_hat = state.v[i] / c2;
    params[i] -= o.lr * m_hat / (std::sqrt(v_hat) + o.eps);
  }
}

Adam::Adam(AdamOptions options) : options_(options) { options_.validate(); }

void Adam::step(std::span<Tensor* const> params) {
  if (states_.empty()) {
    for (const Tensor* p : params) states_.emplace_back(p->numel(), options_);
  }
  if (states_.size() != params.size()) {
    throw ContractError("adam: parameter count changed from " + std::to_string(states_.size()) + " to " +
                        std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& p = *params[i];
    if (!p.requires_grad()) throw ContractError("adam: parameter " + std::to_string(i) + " has no gradient");
    states_[i].options.lr = options_.lr;
    adam_step(p.data(), p.grad(), states_[i]);
  }
  ++steps_;
}

void Adam::set_lr(double lr) {
  if (!(lr > 0.0)) throw ContractError("adam: lr must be positive");
  options_.lr = lr;
}

void zero_grads(std::span<Tensor* const> params) {
  for (Tensor* p : params) p->zero_grad();
}

void LrSchedule::validate() const {
  if (!(initial_lr > 0.0)) throw ConfigError("lr schedule: initial_lr must be positive");
  if (!(decay_factor > 0.0 && decay_factor <= 1.0)) throw ConfigError("lr schedule: decay_factor must lie in (0,1]");
  if (decay_every_epochs == 0) throw ConfigError("lr schedule: decay_every_epochs must be positive");
}

double LrSchedule::lr(std::size_t epoch) const {
  if (epoch == 0) throw ContractError("lr schedule: epochs count from 1");
  const auto k = (epoch - 1) / decay_every_epochs;
  return initial_lr * std::pow(decay_factor, static_cast<double>(k));
}

}  // namespace igb::diff
