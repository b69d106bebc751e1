#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "igb/bench/metrics.hpp"
#include "igb/bench/record.hpp"

namespace igb::bench {

struct MethodRow {
  std::string label;
  std::size_t seeds = 0;
  std::vector<double> metric_mean;          // test metric per task, averaged over seeds
  std::vector<double> delta_m;              // per seed, percent
  std::vector<double> T;                    // per seed, relative to EW
  std::optional<MeanStd> delta_m_summary;   // absent without single-task references
  std::optional<MeanStd> T_summary;         // absent without EW runs
};

/// Seed-aggregated comparison of methods: per-task test metrics, delta_m against
/// the single-task runs of the same seed, and training time relative to EW.
struct MetricReport {
  std::vector<std::string> metric_names;  // "task1 MSE", "task2 Acc", ...
  std::vector<bool> higher_is_better;
  std::vector<MethodRow> rows;            // STL first when present, then EW, then the rest

  const MethodRow* find(const std::string& label) const;
};

// `order` lists method labels to place first, in that order.
MetricReport summarize(const std::vector<RunRecord>& records, const std::vector<std::string>& order = {});

std::string format_table(const MetricReport& report);
std::string report_json(const MetricReport& report);
// Per-task mean training loss per epoch, averaged over seeds, on a log axis.
std::string loss_curve_svg(const std::vector<RunRecord>& runs, const std::string& title);

// Every *.csv record under `dir`, sorted by path.
std::vector<RunRecord> load_records(const std::filesystem::path& dir);

/// Writes table.md, summary.json, and plots/<method>.svg under `dir`.
MetricReport write_report(const std::filesystem::path& dir, const std::vector<RunRecord>& records,
                          const std::vector<std::string>& order = {});

}  // namespace igb::bench
