#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "igb/diff/adam.hpp"
#include "igb/gradbal/aggregators.hpp"
#include "igb/lossbal/strategy.hpp"
#include "igb/mtl/synthetic.hpp"
#include "igb/rl/controller.hpp"

namespace igb::bench {

/// One method of a comparison: a loss balancer, optionally combined with a gradient aggregator.
struct MethodSpec {
  lossbal::StrategyKind strategy = lossbal::StrategyKind::EW;
  std::optional<lossbal::Objective> objective;  // strategy default when unset
  std::optional<gradbal::AggregatorKind> aggregator;

  // "IGBv1", "IGBv1+MGDA", "DWA+SI", "MGDA" (EW with an aggregator), ...
  std::string label() const;
  lossbal::Objective effective_objective() const;
  friend bool operator==(const MethodSpec&, const MethodSpec&) = default;
};

// Parses a label produced by MethodSpec::label(); throws ConfigError listing valid names.
MethodSpec parse_method(const std::string& label);

struct ExperimentConfig {
  std::string name = "experiment";
  mtl::SuiteConfig suite = mtl::SuiteConfig::scaled_default();
  MethodSpec method;
  std::vector<MethodSpec> sweep;  // methods compared by `sweep`
  std::size_t epochs = 60;
  std::vector<std::uint64_t> seeds{1, 2, 3};
  diff::LrSchedule lr{1e-3, 0.5, 100};
  rl::Igbv2Config igbv2;
  std::filesystem::path output_dir;
  std::size_t jobs = 1;

  void validate() const;
};

// Environment variable naming the default output root.
inline constexpr const char* kOutputRootEnv = "IGB_OUTPUT_ROOT";

ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::filesystem::path& path);
std::string config_to_json(const ExperimentConfig& config);

// Output directory: the config's, else $IGB_OUTPUT_ROOT/<name>, else runs/<name>.
std::filesystem::path resolve_output_dir(const ExperimentConfig& config);

}  // namespace igb::bench
