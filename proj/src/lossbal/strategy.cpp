#include "igb/lossbal/strategy.hpp"

#include <algorithm>
#include <cmath>

#include "igb/diff/ops.hpp"
#include "igb/errors.hpp"

namespace igb::lossbal {

const std::vector<std::string>& strategy_names() {
  static const std::vector<std::string> names{"EW", "SI", "RLW", "DWA", "UW", "IGBv1", "IGBv2"};
  return names;
}

std::string to_string(StrategyKind kind) { return strategy_names()[static_cast<std::size_t>(kind)]; }

std::string to_string(Objective objective) {
  return objective == Objective::ScaleInvariant ? "si" : "weighted_sum";
}

StrategyKind parse_strategy(const std::string& name) {
  const auto& names = strategy_names();
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return static_cast<StrategyKind>(i);
  }
  std::string valid;
  for (const auto& n : names) valid += (valid.empty() ? "" : ", ") + n;
  throw ConfigError("unknown strategy '" + name + "'; valid strategies: " + valid);
}

Objective parse_objective(const std::string& name) {
  if (name == "si") return Objective::ScaleInvariant;
  if (name == "weighted_sum") return Objective::WeightedSum;
  throw ConfigError("unknown objective '" + name + "'; valid objectives: si, weighted_sum");
}

Objective default_objective(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::SI:
    case StrategyKind::IGBv1:
    case StrategyKind::IGBv2:
      return Objective::ScaleInvariant;
    default:
      return Objective::WeightedSum;
  }
}

bool sums_to_n(StrategyKind kind) { return kind != StrategyKind::UW; }

LossBalancer::LossBalancer(StrategyKind kind, std::size_t tasks, Objective objective)
    : kind_(kind), tasks_(tasks), objective_(objective) {
  if (tasks == 0) throw ConfigError("a loss balancer needs at least one task");
}

void LossBalancer::check_losses(const LossVector& losses) const {
  if (losses.size() != tasks_) {
    throw ContractError(to_string(kind_) + ": expected " + std::to_string(tasks_) + " losses, got " +
                        std::to_string(losses.size()));
  }
}

void LossBalancer::end_batch(const LossVector&, const BatchContext&) {}
void LossBalancer::end_epoch(std::size_t) {}

Var LossBalancer::total_loss(const LossVector& losses, const WeightDecision& weights) {
  return objective_ == Objective::ScaleInvariant ? total_loss_si(losses, weights)
                                                 : total_loss_weighted_sum(losses, weights);
}

Var LossBalancer::task_term(const LossVector& losses, const WeightDecision& weights, std::size_t task) {
  if (task >= losses.size() || task >= weights.size()) throw ContractError("task_term: no task " + std::to_string(task));
  Var base = objective_ == Objective::ScaleInvariant ? diff::log(losses.terms[task]) : losses.terms[task];
  return diff::scale(base, weights.lambda[task]);
}

EqualWeighting::EqualWeighting(std::size_t tasks, Objective objective)
    : LossBalancer(objective == Objective::ScaleInvariant ? StrategyKind::SI : StrategyKind::EW, tasks, objective) {}

WeightDecision EqualWeighting::weights(const LossVector& losses, const BatchContext&) {
  check_losses(losses);
  return WeightDecision{std::vector<double>(task_count(), 1.0)};
}

RandomWeighting::RandomWeighting(std::size_t tasks, Objective objective, std::uint64_t seed)
    : LossBalancer(StrategyKind::RLW, tasks, objective), rng_(seed) {}

WeightDecision RandomWeighting::weights(const LossVector& losses, const BatchContext&) {
  check_losses(losses);
  return rlw_weights(task_count(), rng_);
}

DynamicWeightAverage::DynamicWeightAverage(std::size_t tasks, Objective objective, double temperature)
    : LossBalancer(StrategyKind::DWA, tasks, objective), temperature_(temperature), epoch_sum_(tasks, 0.0) {
  if (!(temperature > 0.0)) throw ConfigError("DWA temperature must be positive");
}

WeightDecision DynamicWeightAverage::weights(const LossVector& losses, const BatchContext&) {
  check_losses(losses);
  return dwa_weights(history_, task_count(), temperature_);
}

void DynamicWeightAverage::end_batch(const LossVector& losses, const BatchContext&) {
  for (std::size_t i = 0; i < task_count(); ++i) epoch_sum_[i] += losses.values[i];
  ++epoch_batches_;
}

void DynamicWeightAverage::end_epoch(std::size_t) {
  if (epoch_batches_ == 0) return;
  std::vector<double> mean(task_count());
  for (std::size_t i = 0; i < task_count(); ++i) mean[i] = epoch_sum_[i] / static_cast<double>(epoch_batches_);
  history_.push_epoch(std::move(mean));
  std::fill(epoch_sum_.begin(), epoch_sum_.end(), 0.0);
  epoch_batches_ = 0;
}

UncertaintyWeighting::UncertaintyWeighting(std::size_t tasks, Objective objective)
    : LossBalancer(StrategyKind::UW, tasks, objective), log_sigma_(diff::Tensor::zeros({tasks}, true)) {}

WeightDecision UncertaintyWeighting::weights(const LossVector& losses, const BatchContext&) {
  check_losses(losses);
  WeightDecision w;
  for (double s : log_sigma_.data()) w.lambda.push_back(0.5 * std::exp(-2.0 * s));
  return w;
}

Var UncertaintyWeighting::task_term(const LossVector& losses, const WeightDecision&, std::size_t task) {
  check_losses(losses);
  Var base = objective() == Objective::ScaleInvariant ? diff::log(losses.terms[task]) : losses.terms[task];
  diff::Tape& tape = base.tape();
  Var s = diff::element(tape.param(log_sigma_), task);
  Var precision = diff::scale(diff::exp(diff::scale(s, -2.0)), 0.5);
  return diff::add(diff::mul(precision, base), s);
}

Var UncertaintyWeighting::total_loss(const LossVector& losses, const WeightDecision& weights) {
  check_losses(losses);
  Var total = task_term(losses, weights, 0);
  for (std::size_t i = 1; i < task_count(); ++i) total = diff::add(total, task_term(losses, weights, i));
  return total;
}

Igbv1::Igbv1(std::size_t tasks, Objective objective) : LossBalancer(StrategyKind::IGBv1, tasks, objective) {}

WeightDecision Igbv1::weights(const LossVector& losses, const BatchContext& ctx) {
  check_losses(losses);
  tracker_.observe(losses.values, ctx.epoch, ctx.batch, ctx.batches_per_epoch);
  return igbv1_weights(losses.values, tracker_.base(), ctx.epoch);
}

std::unique_ptr<LossBalancer> make_loss_balancer(StrategyKind kind, std::size_t tasks,
                                                 const BalancerOptions& options) {
  const Objective obj = options.objective.value_or(default_objective(kind));
  switch (kind) {
    case StrategyKind::EW:
      return std::make_unique<EqualWeighting>(tasks, obj);
    case StrategyKind::SI:
      return std::make_unique<EqualWeighting>(tasks, Objective::ScaleInvariant);
    case StrategyKind::RLW:
      return std::make_unique<RandomWeighting>(tasks, obj, options.seed);
    case StrategyKind::DWA:
      return std::make_unique<DynamicWeightAverage>(tasks, obj);
    case StrategyKind::UW:
      return std::make_unique<UncertaintyWeighting>(tasks, obj);
    case StrategyKind::IGBv1:
      return std::make_unique<Igbv1>(tasks, obj);
    case StrategyKind::IGBv2:
      break;
  }
  throw ConfigError("IGBv2 is built by the SAC weighter, not make_loss_balancer");
}

}  // namespace igb::lossbal
