#include "igb/bench/metrics.hpp"

#include <cmath>

#include "igb/errors.hpp"

namespace igb::bench {

double compute_delta_m(const std::vector<double>& method, const std::vector<double>& baseline,
                       const std::vector<bool>& higher_is_better, const std::vector<std::string>& names) {
  const std::size_t k = method.size();
  if (k == 0 || baseline.size() != k || higher_is_better.size() != k || (!names.empty() && names.size() != k)) {
    throw ShapeError("delta_m: metric vectors must be non-empty and of equal length");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    if (baseline[i] == 0.0) {
      const std::string name = names.empty() ? "metric " + std::to_string(i) : names[i];
      throw DomainError("delta_m: baseline value of " + name + " is zero");
    }
    const double rel = (method[i] - baseline[i]) / baseline[i];
    total += higher_is_better[i] ? -rel : rel;
  }
  return 100.0 * total / static_cast<double>(k);
}

double compute_T(double method_seconds, std::optional<double> ew_seconds) {
  if (!ew_seconds) throw StateError("T: no EW reference run");
  if (!(method_seconds > 0.0) || !(*ew_seconds > 0.0)) throw DomainError("T: training times must be positive");
  return method_seconds / *ew_seconds;
}

MeanStd mean_std(const std::vector<double>& values) {
  MeanStd out;
  if (values.empty()) return out;
  for (double v : values) out.mean += v;
  out.mean /= static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return out;
}

}  // namespace igb::bench
