#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gmia/eval/experiment.hpp"

namespace gmia::cli {

/// Anything wrong with the config file or flags. Maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SweepConfig {
  std::string axis = "epochs";  // epochs | layers
  std::vector<int> grid;
};

struct TransferConfig {
  std::vector<eval::ModelSide> shadows;
  std::vector<eval::ModelSide> targets;
};

struct ExperimentConfig {
  std::string name = "experiment";
  std::uint64_t seed = 0;
  int repeats = 1;
  unsigned threads = 0;
  std::filesystem::path output = "runs";
  eval::AttackSetting setting;
  std::optional<SweepConfig> sweep;
  std::optional<TransferConfig> transfer;
};

/// Parses and validates a YAML experiment file, loading every dataset it
/// names. Throws ConfigError with "<file>:<line>: " prefixed messages.
ExperimentConfig load_config(const std::filesystem::path& path);

/// Dataset from a TU directory; the name defaults to the directory's
/// basename.
std::shared_ptr<const Dataset> load_tu(const std::filesystem::path& dir, const std::string& name);

void validate_sweep(const ExperimentConfig& cfg, const SweepConfig& sweep);

}  // namespace gmia::cli
