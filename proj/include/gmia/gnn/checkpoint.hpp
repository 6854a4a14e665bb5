#pragma once

#include <filesystem>

#include <json.hpp>

#include "gmia/gnn/model.hpp"

namespace gmia::gnn {

inline constexpr int kCheckpointVersion = 1;

nlohmann::json config_to_json(const ModelConfig& c);
/// Rejects unknown keys; missing keys keep their defaults.
ModelConfig config_from_json(const nlohmann::json& j);

/// Versioned JSON dump of config, shapes, weights and history.
nlohmann::json checkpoint_to_json(const TrainedModel& model);
TrainedModel checkpoint_from_json(const nlohmann::json& j);

void save_checkpoint(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel load_checkpoint(const std::filesystem::path& path);

}  // namespace gmia::gnn
