#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

namespace igb::gradbal {

/// n flattened gradients of equal dimension d, one per task.
struct TaskGradients {
  std::vector<std::vector<double>> grads;

  std::size_t tasks() const { return grads.size(); }
  std::size_t dim() const { return grads.empty() ? 0 : grads.front().size(); }
  void validate() const;
};

/// Convex-combination coefficients on the probability simplex.
struct SimplexWeights {
  std::vector<double> gamma;
};

struct MinNormResult {
  std::vector<double> direction;  // sum_i gamma_i g_i
  SimplexWeights weights;
  std::size_t iterations = 0;
};

inline constexpr std::size_t kFrankWolfeMaxIters = 1000;
inline constexpr double kFrankWolfeTolerance = 1e-10;

// Two-vector closed form: gamma1 = clamp(<g2 - g1, g2> / |g1 - g2|^2, 0, 1).
MinNormResult min_norm_two(const std::vector<double>& g1, const std::vector<double>& g2);

// Frank-Wolfe over the simplex on the Gram matrix, with exact line search and
// away steps, stopping once the duality gap drops below `tol` times the
// largest squared gradient norm.
MinNormResult frank_wolfe_min_norm(const TaskGradients& grads, std::size_t max_iters = kFrankWolfeMaxIters,
                                   double tol = kFrankWolfeTolerance);

/// Min-norm element of the convex hull (MGDA). n = 2 uses the closed form.
MinNormResult mgda_aggregate(const TaskGradients& grads, std::size_t max_iters = kFrankWolfeMaxIters,
                             double tol = kFrankWolfeTolerance);

/// Projects each task gradient off every conflicting other gradient (visited in
/// random order), then averages.
std::vector<double> pcgrad_aggregate(const TaskGradients& grads, std::mt19937_64& rng);

std::vector<double> mean_aggregate(const TaskGradients& grads);

enum class AggregatorKind { Mean, MGDA, PCGrad };

std::string to_string(AggregatorKind kind);
// Throws ConfigError naming the valid choices.
AggregatorKind parse_aggregator(const std::string& name);
const std::vector<std::string>& aggregator_names();

/// Maps per-task shared-parameter gradients to one update direction.
/// Further aggregators (CAGrad, IMTL-G, Nash-MTL) plug in by subclassing.
class GradAggregator {
 public:
  virtual ~GradAggregator() = default;
  virtual std::string name() const = 0;
  // 0 accepts any task count.
  virtual std::size_t arity() const { return 0; }
  virtual std::vector<double> aggregate(const TaskGradients& grads) = 0;
};

class MeanAggregator final : public GradAggregator {
 public:
  std::string name() const override { return "mean"; }
  std::vector<double> aggregate(const TaskGradients& grads) override { return mean_aggregate(grads); }
};

class MgdaAggregator final : public GradAggregator {
 public:
  explicit MgdaAggregator(std::size_t max_iters = kFrankWolfeMaxIters, double tol = kFrankWolfeTolerance)
      : max_iters_(max_iters), tol_(tol) {}
  std::string name() const override { return "MGDA"; }
  std::vector<double> aggregate(const TaskGradients& grads) override;
  const SimplexWeights& last_weights() const { return last_; }

 private:
  std::size_t max_iters_;
  double tol_;
  SimplexWeights last_;
};

class PcGradAggregator final : public GradAggregator {
 public:
  explicit PcGradAggregator(std::uint64_t seed) : rng_(seed) {}
  std::string name() const override { return "PCGrad"; }
  std::vector<double> aggregate(const TaskGradients& grads) override { return pcgrad_aggregate(grads, rng_); }

 private:
  std::mt19937_64 rng_;
};

std::unique_ptr<GradAggregator> make_aggregator(AggregatorKind kind, std::uint64_t seed = 0);

}  // namespace igb::gradbal
