#pragma once

#include <cstddef>
#include <deque>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "igb/diff/tape.hpp"
#include "igb/mtl/model.hpp"

namespace igb::lossbal {

using diff::Var;
using mtl::LossVector;

/// Per-task weights chosen for one batch.
struct WeightDecision {
  std::vector<double> lambda;

  std::size_t size() const { return lambda.size(); }
  double sum() const;
};

inline constexpr double kWeightSumTolerance = 1e-9;

// Throws ContractError unless every entry is positive and finite, and, when
// `sums_to_n`, the entries sum to their count within kWeightSumTolerance.
void validate_weights(const WeightDecision& w, bool sums_to_n);

// n * softmax(z), computed with the max-shift for stability.
WeightDecision scaled_softmax(std::span<const double> z);

/// Sum of lambda_i * log(L_i); gradients are invariant to rescaling any L_i.
Var total_loss_si(const LossVector& losses, const WeightDecision& weights);
/// Sum of lambda_i * L_i.
Var total_loss_weighted_sum(const LossVector& losses, const WeightDecision& weights);

/// Per-task mean loss over every batch of epoch 2.
class BaselineLosses {
 public:
  bool captured() const { return captured_; }
  // Throws StateError while not captured.
  const std::vector<double>& values() const;

  // `epoch_losses` holds one loss vector per batch of the epoch.
  void capture(std::span<const std::vector<double>> epoch_losses, std::size_t epoch);

 private:
  std::vector<double> values_;
  bool captured_ = false;
};

/// Collects epoch-2 batch losses and captures L_base at the last batch of epoch 2.
class BaselineTracker {
 public:
  void observe(std::span<const double> losses, std::size_t epoch, std::size_t batch, std::size_t batches_per_epoch);
  const BaselineLosses& base() const { return base_; }
  const std::vector<std::vector<double>>& epoch2_losses() const { return epoch2_; }

 private:
  std::vector<std::vector<double>> epoch2_;
  BaselineLosses base_;
};

/// All ones for epochs 1-2, then n * softmax(L / L_base).
WeightDecision igbv1_weights(std::span<const double> losses, const BaselineLosses& base, std::size_t epoch);

/// n * softmax(z) with z drawn from a standard normal.
WeightDecision rlw_weights(std::size_t n, std::mt19937_64& rng);

/// Average per-task training loss of the two most recent epochs, oldest first.
class LossHistory {
 public:
  void push_epoch(std::vector<double> mean_losses);
  std::size_t epochs() const { return epochs_.size(); }
  const std::vector<double>& older() const { return epochs_.front(); }
  const std::vector<double>& newer() const { return epochs_.back(); }

 private:
  std::deque<std::vector<double>> epochs_;
};

inline constexpr double kDwaTemperature = 2.0;

/// Dynamic weight average: n * softmax(r / T), r_i = L_i(t-1) / L_i(t-2).
/// All ones until two epochs of history exist.
WeightDecision dwa_weights(const LossHistory& history, std::size_t n, double temperature = kDwaTemperature);

}  // namespace igb::lossbal
