#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "gmia/eval/experiment.hpp"

namespace gmia::eval {

/// Column order of runs_csv.
inline constexpr const char* kRunsCsvHeader =
    "setting,target,shadow,target_arch,shadow_arch,target_dataset,shadow_dataset,attack,seed,"
    "precision,recall,f1,target_train_acc,target_test_acc,gap,k,threshold";

nlohmann::json report_to_json(const AttackReport& report);
/// One row per run across all reports.
std::string runs_csv(const std::vector<AttackReport>& reports);

nlohmann::json series_to_json(const SweepSeries& series);
/// Header "<axis>,gap,f1,f1_std".
std::string series_csv(const SweepSeries& series);

nlohmann::json grid_to_json(const TransferGrid& grid);
/// Mean F1 matrix, shadow settings as rows, target settings as columns.
std::string grid_csv(const TransferGrid& grid);

nlohmann::json correlations_to_json(const CorrelationTable& table);
std::string correlations_csv(const CorrelationTable& table);

nlohmann::json stats_to_json(const DatasetStats& s);
std::string stats_csv(const std::string& name, const DatasetStats& s);

}  // namespace gmia::eval
