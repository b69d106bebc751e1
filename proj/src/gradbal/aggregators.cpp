#include "igb/gradbal/aggregators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "igb/errors.hpp"

namespace igb::gradbal {
namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

std::vector<double> combine(const TaskGradients& grads, const std::vector<double>& gamma) {
  std::vector<double> out(grads.dim(), 0.0);
  for (std::size_t i = 0; i < grads.tasks(); ++i) {
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += gamma[i] * grads.grads[i][k];
  }
  return out;
}

}  // namespace

void TaskGradients::validate() const {
  if (grads.empty()) throw ContractError("task gradients: need at least one task");
  const std::size_t d = grads.front().size();
  if (d == 0) throw ContractError("task gradients: dimension must be positive");
  for (std::size_t i = 0; i < grads.size(); ++i) {
    if (grads[i].size() != d) {
      throw ShapeError("task gradients: task " + std::to_string(i) + " has dimension " +
                       std::to_string(grads[i].size()) + ", expected " + std::to_string(d));
    }
    for (double v : grads[i]) {
      if (!std::isfinite(v)) throw DomainError("task gradients: task " + std::to_string(i) + " is not finite");
    }
  }
}

MinNormResult min_norm_two(const std::vector<double>& g1, const std::vector<double>& g2) {
  if (g1.size() != g2.size()) throw ShapeError("min_norm_two: dimension mismatch");
  double denom = 0.0, numer = 0.0;
  for (std::size_t k = 0; k < g1.size(); ++k) {
    const double diff = g1[k] - g2[k];
    denom += diff * diff;
    numer -= diff * g2[k];
  }
  const double gamma1 = denom > 0.0 ? std::clamp(numer / denom, 0.0, 1.0) : 0.5;
  MinNormResult out;
  out.weights.gamma = {gamma1, 1.0 - gamma1};
  out.direction.resize(g1.size());
  for (std::size_t k = 0; k < g1.size(); ++k) out.direction[k] = gamma1 * g1[k] + (1.0 - gamma1) * g2[k];
  return out;
}

MinNormResult frank_wolfe_min_norm(const TaskGradients& grads, std::size_t max_iters, double tol) {
  grads.validate();
  const std::size_t n = grads.tasks();
  std::vector<double> gram(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) gram[i * n + j] = gram[j * n + i] = dot(grads.grads[i], grads.grads[j]);
  }

  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) scale = std::max(scale, gram[i * n + i]);

  std::vector<double> gamma(n, 1.0 / static_cast<double>(n));
  std::vector<double> mg(n, 0.0);  // M gamma
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) mg[i] += gram[i * n + j] * gamma[j];

  std::size_t iter = 0;
  std::vector<double> md(n);
  for (; iter < max_iters; ++iter) {
    const double f = dot(gamma, mg);
    const std::size_t s = static_cast<std::size_t>(std::min_element(mg.begin(), mg.end()) - mg.begin());
    std::size_t a = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (gamma[i] > 0.0 && (a == n || mg[i] > mg[a])) a = i;
    }
    const double fw_gap = f - mg[s];
    if (fw_gap <= tol * scale) break;
    const double away_gap = mg[a] - f;

    // Direction d and its largest feasible step.
    std::vector<double> d(n, 0.0);
    double max_step = 1.0;
    if (fw_gap >= away_gap) {
      for (std::size_t i = 0; i < n; ++i) d[i] = -gamma[i];
      d[s] += 1.0;
    } else {
      for (std::size_t i = 0; i < n; ++i) d[i] = gamma[i];
      d[a] -= 1.0;
      max_step = gamma[a] / (1.0 - gamma[a]);
    }
    std::fill(md.begin(), md.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) md[i] += gram[i * n + j] * d[j];
    const double slope = dot(d, mg);
    const double curvature = dot(d, md);
    double step = curvature > 0.0 ? -slope / curvature : max_step;
    step = std::clamp(step, 0.0, max_step);
    if (step == 0.0) break;
    for (std::size_t i = 0; i < n; ++i) gamma[i] += step * d[i];
    if (step == max_step && fw_gap < away_gap) gamma[a] = 0.0;  // drop step
    // Clear round-off below zero and renormalize onto the simplex.
    double total = 0.0;
    for (auto& g : gamma) total += (g = std::max(g, 0.0));
    for (auto& g : gamma) g /= total;
    std::fill(mg.begin(), mg.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) mg[i] += gram[i * n + j] * gamma[j];
  }

  // Thin hulls converge slowly; an optimum on an edge is found exactly by the pairwise closed form.
  double best = dot(gamma, mg);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double gii = gram[i * n + i], gjj = gram[j * n + j], gij = gram[i * n + j];
      const double denom = gii + gjj - 2.0 * gij;
      const double t = denom > 0.0 ? std::clamp((gjj - gij) / denom, 0.0, 1.0) : 0.5;
      const double f = t * t * gii + (1.0 - t) * (1.0 - t) * gjj + 2.0 * t * (1.0 - t) * gij;
      if (f < best) {
        best = f;
        std::fill(gamma.begin(), gamma.end(), 0.0);
        gamma[i] = t;
        gamma[j] = 1.0 - t;
      }
    }
  }

  MinNormResult out;
  out.weights.gamma = gamma;
  out.direction = combine(grads, gamma);
  out.iterations = iter;
  return out;
}

MinNormResult mgda_aggregate(const TaskGradients& grads, std::size_t max_iters, double tol) {
  grads.validate();
  if (grads.tasks() == 1) {
    return MinNormResult{grads.grads.front(), SimplexWeights{{1.0}}, 0};
  }
  if (grads.tasks() == 2) return min_norm_two(grads.grads[0], grads.grads[1]);
  return frank_wolfe_min_norm(grads, max_iters, tol);
}

std::vector<double> pcgrad_aggregate(const TaskGradients& grads, std::mt19937_64& rng) {
  grads.validate();
  const std::size_t n = grads.tasks(), d = grads.dim();
  std::vector<double> norms2(n);
  for (std::size_t j = 0; j < n; ++j) norms2[j] = dot(grads.grads[j], grads.grads[j]);

  std::vector<double> out(d, 0.0);
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> gi = grads.grads[i];
    order.clear();
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) order.push_back(j);
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t j : order) {
      if (norms2[j] == 0.0) continue;
      const double c = dot(gi, grads.grads[j]);
      if (c < 0.0) {
        const double coef = c / norms2[j];
        for (std::size_t k = 0; k < d; ++k) gi[k] -= coef * grads.grads[j][k];
      }
    }
    for (std::size_t k = 0; k < d; ++k) out[k] += gi[k];
  }
  for (auto& v : out) v /= static_cast<double>(n);
  return out;
}

std::vector<double> mean_aggregate(const TaskGradients& grads) {
  grads.validate();
  std::vector<double> out(grads.dim(), 0.0);
  for (const auto& g : grads.grads)
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += g[k];
  for (auto& v : out) v /= static_cast<double>(grads.tasks());
  return out;
}

const std::vector<std::string>& aggregator_names() {
  static const std::vector<std::string> names{"mean", "MGDA", "PCGrad"};
  return names;
}

std::string to_string(AggregatorKind kind) { return aggregator_names()[static_cast<std::size_t>(kind)]; }

AggregatorKind parse_aggregator(const std::string& name) {
  const auto& names = aggregator_names();
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return static_cast<AggregatorKind>(i);
  }
  std::string valid;
  for (const auto& n : names) valid += (valid.empty() ? "" : ", ") + n;
  throw ConfigError("unknown aggregator '" + name + "'; valid aggregators: " + valid);
}

std::vector<double> MgdaAggregator::aggregate(const TaskGradients& grads) {
  auto result = mgda_aggregate(grads, max_iters_, tol_);
  last_ = result.weights;
  return std::move(result.direction);
}

std::unique_ptr<GradAggregator> make_aggregator(AggregatorKind kind, std::uint64_t seed) {
  switch (kind) {
    case AggregatorKind::Mean:
      return std::make_unique<MeanAggregator>();
    case AggregatorKind::MGDA:
      return std::make_unique<MgdaAggregator>();
    case AggregatorKind::PCGrad:
      return std::make_unique<PcGradAggregator>(seed);
  }
  throw ConfigError("unknown aggregator kind");
}

}  // namespace igb::gradbal
