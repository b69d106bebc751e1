#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace igb::bench {

struct BatchRow {
  std::size_t epoch = 0;
  std::size_t batch = 0;
  std::vector<double> losses;
  std::vector<double> weights;
  std::optional<double> reward;  // IGBv2 transitions only

  friend bool operator==(const BatchRow&, const BatchRow&) = default;
};

struct EpochRow {
  std::size_t epoch = 0;
  std::vector<double> train_losses;  // mean over the epoch's batches
  std::vector<double> val_losses;
  std::vector<double> val_metrics;
  double lr = 0.0;
  std::optional<double> val_delta_m;  // against single-task validation metrics
  double train_seconds = 0.0;         // cumulative training CPU time
  double wall_seconds = 0.0;          // cumulative wall-clock time

  friend bool operator==(const EpochRow&, const EpochRow&) = default;
};

/// Everything a training run logs. One file per run.
struct RunRecord {
  std::string method;
  std::uint64_t seed = 0;
  std::size_t tasks = 0;
  std::vector<bool> higher_is_better;
  std::vector<BatchRow> batches;
  std::vector<EpochRow> epochs;
  std::size_t selected_epoch = 0;  // 0 when no epoch completed
  std::vector<double> test_metrics;
  std::vector<double> test_losses;
  std::optional<double> test_delta_m;
  double train_seconds = 0.0;
  double wall_seconds = 0.0;
  std::size_t backward_passes = 0;
  std::size_t clamped_losses = 0;
  bool aborted = false;
  std::string abort_reason;

  friend bool operator==(const RunRecord&, const RunRecord&) = default;
};

// Equality ignoring the timing fields.
bool same_trajectory(const RunRecord& a, const RunRecord& b);

// Throws ContractError unless rows are strictly ordered by (epoch, batch) and timings are monotone.
void validate_record(const RunRecord& record);

std::string write_record(const RunRecord& record);
RunRecord parse_record(const std::string& text);

void save_record(const RunRecord& record, const std::filesystem::path& path);
RunRecord load_record(const std::filesystem::path& path);

// "<method>_seed<seed>.csv" with characters unsafe in file names replaced.
std::string record_file_name(const std::string& method, std::uint64_t seed);

}  // namespace igb::bench
