#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "igb/diff/tensor.hpp"
#include "igb/lossbal/weights.hpp"

namespace igb::lossbal {

enum class StrategyKind { EW, SI, RLW, DWA, UW, IGBv1, IGBv2 };

// Which total loss a strategy's weights are applied to.
enum class Objective { WeightedSum, ScaleInvariant };

std::string to_string(StrategyKind kind);
std::string to_string(Objective objective);
// Throws ConfigError naming the valid choices.
StrategyKind parse_strategy(const std::string& name);
Objective parse_objective(const std::string& name);
const std::vector<std::string>& strategy_names();
Objective default_objective(StrategyKind kind);
// Strategies whose weights must be positive and sum to n.
bool sums_to_n(StrategyKind kind);

/// Where the training loop is when a strategy is consulted.
struct BatchContext {
  std::size_t epoch = 1;              // counts from 1
  std::size_t batch = 1;              // counts from 1 within the epoch
  std::size_t batches_per_epoch = 1;
  std::size_t global_batch = 1;       // counts from 1 across the run
  double lr = 1e-3;
  double initial_lr = 1e-3;
};

/// A loss-balancing strategy: picks lambda for each batch and assembles the
/// total loss it is meant to be trained on.
class LossBalancer {
 public:
  LossBalancer(StrategyKind kind, std::size_t tasks, Objective objective);
  virtual ~LossBalancer() = default;

  StrategyKind kind() const { return kind_; }
  Objective objective() const { return objective_; }
  std::size_t task_count() const { return tasks_; }

  // Called once per batch, in order, before the parameter update.
  virtual WeightDecision weights(const LossVector& losses, const BatchContext& ctx) = 0;
  // Called once per batch after the update.
  virtual void end_batch(const LossVector& losses, const BatchContext& ctx);
  virtual void end_epoch(std::size_t epoch);

  // Total loss under this strategy's objective.
  virtual Var total_loss(const LossVector& losses, const WeightDecision& weights);
  // The i-th summand of total_loss; gradient balancing differentiates these one at a time.
  virtual Var task_term(const LossVector& losses, const WeightDecision& weights, std::size_t task);

  // Learnable strategy parameters (UW), trained alongside the model.
  virtual std::vector<diff::Tensor*> parameters() { return {}; }

 protected:
  void check_losses(const LossVector& losses) const;

 private:
  StrategyKind kind_;
  std::size_t tasks_;
  Objective objective_;
};

/// Equal weighting; as SI it is the plain sum of log losses.
class EqualWeighting final : public LossBalancer {
 public:
  EqualWeighting(std::size_t tasks, Objective objective);
  WeightDecision weights(const LossVector& losses, const BatchContext& ctx) override;
};

class RandomWeighting final : public LossBalancer {
 public:
  RandomWeighting(std::size_t tasks, Objective objective, std::uint64_t seed);
  WeightDecision weights(const LossVector& losses, const BatchContext& ctx) override;

 private:
  std::mt19937_64 rng_;
};

class DynamicWeightAverage final : public LossBalancer {
 public:
  DynamicWeightAverage(std::size_t tasks, Objective objective, double temperature = kDwaTemperature);
  WeightDecision weights(const LossVector& losses, const BatchContext& ctx) override;
  void end_batch(const LossVector& losses, const BatchContext& ctx) override;
  void end_epoch(std::size_t epoch) override;
  const LossHistory& history() const { return history_; }

 private:
  double temperature_;
  LossHistory history_;
  std::vector<double> epoch_sum_;
  std::size_t epoch_batches_ = 0;
};

/// Uncertainty weighting with learnable s_i = log sigma_i:
/// sum_i exp(-2 s_i) / 2 * L_i + s_i (L_i replaced by log L_i under SI).
class UncertaintyWeighting final : public LossBalancer {
 public:
  UncertaintyWeighting(std::size_t tasks, Objective objective);
  WeightDecision weights(const LossVector& losses, const BatchContext& ctx) override;
  Var total_loss(const LossVector& losses, const WeightDecision& weights) override;
  Var task_term(const LossVector& losses, const WeightDecision& weights, std::size_t task) override;
  std::vector<diff::Tensor*> parameters() override { return {&log_sigma_}; }
  const diff::Tensor& log_sigma() const { return log_sigma_; }

 private:
  diff::Tensor log_sigma_;
};

class Igbv1 final : public LossBalancer {
 public:
  explicit Igbv1(std::size_t tasks, Objective objective = Objective::ScaleInvariant);
  WeightDecision weights(const LossVector& losses, const BatchContext& ctx) override;
  const BaselineLosses& base() const { return tracker_.base(); }

 private:
  BaselineTracker tracker_;
};

struct BalancerOptions {
  std::optional<Objective> objective;  // strategy default when unset
  std::uint64_t seed = 0;              // RLW draws
};

// Builds every strategy except IGBv2, which lives with the SAC weighter.
std::unique_ptr<LossBalancer> make_loss_balancer(StrategyKind kind, std::size_t tasks,
                                                 const BalancerOptions& options = {});

}  // namespace igb::lossbal
