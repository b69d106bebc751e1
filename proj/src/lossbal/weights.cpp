#include "igb/lossbal/weights.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "igb/diff/ops.hpp"
#include "igb/errors.hpp"

namespace igb::lossbal {

double WeightDecision::sum() const { return std::accumulate(lambda.begin(), lambda.end(), 0.0); }

void validate_weights(const WeightDecision& w, bool sums_to_n) {
  if (w.lambda.empty()) throw ContractError("weights: empty decision");
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (!(w.lambda[i] > 0.0) || !std::isfinite(w.lambda[i])) {
      std::ostringstream msg;
      msg << "weights: entry " << i << " is " << w.lambda[i] << ", must be positive and finite";
      throw ContractError(msg.str());
    }
  }
  if (sums_to_n && std::abs(w.sum() - static_cast<double>(w.size())) > kWeightSumTolerance) {
    std::ostringstream msg;
    msg << "weights: sum " << w.sum() << " differs from " << w.size();
    throw ContractError(msg.str());
  }
}

WeightDecision scaled_softmax(std::span<const double> z) {
  if (z.empty()) throw ContractError("scaled_softmax: empty input");
  const double mx = *std::max_element(z.begin(), z.end());
  WeightDecision out;
  out.lambda.resize(z.size());
  double total = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) total += (out.lambda[i] = std::exp(z[i] - mx));
  const double n = static_cast<double>(z.size());
  for (auto& v : out.lambda) v = n * v / total;
  return out;
}

namespace {

void check_arity(const LossVector& losses, const WeightDecision& weights) {
  if (losses.size() != weights.size() || losses.terms.size() != losses.size()) {
    throw ShapeError("total loss: " + std::to_string(losses.size()) + " losses but " +
                     std::to_string(weights.size()) + " weights");
  }
}

}  // namespace

Var total_loss_si(const LossVector& losses, const WeightDecision& weights) {
  check_arity(losses, weights);
  std::vector<Var> logs;
  logs.reserve(losses.size());
  for (const auto& term : losses.terms) logs.push_back(diff::log(term));
  return diff::weighted_sum(logs, weights.lambda);
}

Var total_loss_weighted_sum(const LossVector& losses, const WeightDecision& weights) {
  check_arity(losses, weights);
  return diff::weighted_sum(losses.terms, weights.lambda);
}

const std::vector<double>& BaselineLosses::values() const {
  if (!captured_) throw StateError("L_base has not been captured yet");
  return values_;
}

void BaselineLosses::capture(std::span<const std::vector<double>> epoch_losses, std::size_t epoch) {
  if (captured_) throw StateError("L_base was already captured");
  if (epoch != 2) throw ContractError("L_base is captured from epoch 2, got epoch " + std::to_string(epoch));
  if (epoch_losses.empty()) throw ContractError("L_base capture needs at least one batch");
  const std::size_t n = epoch_losses.front().size();
  std::vector<double> mean(n, 0.0);
  for (const auto& batch : epoch_losses) {
    if (batch.size() != n) throw ShapeError("L_base capture: inconsistent task count");
    for (std::size_t i = 0; i < n; ++i) mean[i] += batch[i];
  }
  for (std::size_t i = 0; i < n; ++i) {
    mean[i] /= static_cast<double>(epoch_losses.size());
    if (!(mean[i] > 0.0)) throw DomainError("L_base entry " + std::to_string(i) + " is not positive");
  }
  values_ = std::move(mean);
  captured_ = true;
}

void BaselineTracker::observe(std::span<const double> losses, std::size_t epoch, std::size_t batch,
                              std::size_t batches_per_epoch) {
  if (epoch != 2 || base_.captured()) return;
  epoch2_.emplace_back(losses.begin(), losses.end());
  if (batch == batches_per_epoch) base_.capture(epoch2_, epoch);
}

WeightDecision igbv1_weights(std::span<const double> losses, const BaselineLosses& base, std::size_t epoch) {
  if (epoch <= 2) return WeightDecision{std::vector<double>(losses.size(), 1.0)};
  if (!base.captured()) throw StateError("IGBv1 after epoch 2 needs a captured L_base");
  const auto& lb = base.values();
  if (lb.size() != losses.size()) throw ShapeError("IGBv1: L_base arity differs from losses");
  std::vector<double> ratio(losses.size());
  for (std::size_t i = 0; i < ratio.size(); ++i) ratio[i] = losses[i] / lb[i];
  return scaled_softmax(ratio);
}

WeightDecision rlw_weights(std::size_t n, std::mt19937_64& rng) {
  if (n == 0) throw ContractError("rlw_weights: n must be positive");
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> z(n);
  for (auto& v : z) v = normal(rng);
  return scaled_softmax(z);
}

void LossHistory::push_epoch(std::vector<double> mean_losses) {
  epochs_.push_back(std::move(mean_losses));
  while (epochs_.size() > 2) epochs_.pop_front();
}

WeightDecision dwa_weights(const LossHistory& history, std::size_t n, double temperature) {
  if (history.epochs() < 2) return WeightDecision{std::vector<double>(n, 1.0)};
  const auto& prev = history.newer();
  const auto& prev2 = history.older();
  if (prev.size() != n || prev2.size() != n) throw ShapeError("dwa_weights: history arity differs from n");
  std::vector<double> r(n);
  for (std::size_t i = 0; i < n; ++i) r[i] = prev[i] / prev2[i] / temperature;
  return scaled_softmax(r);
}

}  // namespace igb::lossbal
