#pragma once

#include <optional>
#include <string>
#include <vector>

namespace igb::bench {

/// Average per-task relative drop against single-task baselines, in percent.
/// Positive means worse than the baseline; each term is sign-flipped for
/// higher-is-better metrics. Throws DomainError naming a zero baseline metric.
double compute_delta_m(const std::vector<double>& method, const std::vector<double>& baseline,
                       const std::vector<bool>& higher_is_better, const std::vector<std::string>& names = {});

// method_time / ew_time. Throws StateError when the EW reference is missing.
double compute_T(double method_seconds, std::optional<double> ew_seconds);

struct MeanStd {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation; 0 for a single value
};

MeanStd mean_std(const std::vector<double>& values);

}  // namespace igb::bench
