#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gmia/attack/shadow_attack.hpp"
#include "gmia/attack/threshold_attack.hpp"
#include "gmia/eval/metrics.hpp"

namespace gmia::eval {

enum class AttackKind { Training, Threshold };

std::string to_string(AttackKind kind);
AttackKind parse_attack_kind(const std::string& name);

/// One side of an experiment: the data it draws from and how its model is
/// built. Seeds inside `train` are replaced per run.
struct ModelSide {
  std::string label;
  std::shared_ptr<const Dataset> data;
  gnn::ModelConfig model;
  gnn::TrainConfig train;
};

struct AttackSpec {
  AttackKind kind = AttackKind::Training;
  attack::AttackModelConfig model;  // training-based attacks
  attack::MetricKind metric = attack::MetricKind::CrossEntropy;  // threshold attacks
  attack::ThresholdObjective objective;
};

/// Target and shadow sides plus the attack. When both sides point at the same
/// Dataset object it is split into disjoint halves (target half, shadow half);
/// otherwise the target uses one half of its data and the shadow one half of
/// its own.
struct AttackSetting {
  std::string name;
  ModelSide target;
  ModelSide shadow;
  AttackSpec attack;
};

struct RunResult {
  std::uint64_t seed = 0;
  AttackScores scores;
  double target_train_acc = 0.0;
  double target_test_acc = 0.0;
  double gap = 0.0;
  int k = 0;                       // training-based attacks
  std::optional<double> threshold;  // threshold attacks
};

/// Everything one pipeline run produced, including the reference metric
/// distribution (shadow members / non-members) for threshold attacks.
struct RunOutcome {
  RunResult result;
  std::vector<attack::MetricSample> reference_samples;
  std::vector<attack::AttackRecord> attack_records;
};

struct AttackReport {
  std::string setting;
  std::string target_label;
  std::string shadow_label;
  std::string target_arch;
  std::string shadow_arch;
  std::string target_dataset;
  std::string shadow_dataset;
  std::string attack;
  std::vector<RunResult> runs;
  MeanStd precision;
  MeanStd recall;
  MeanStd f1;
  MeanStd gap;
};

struct RunOptions {
  /// Worker threads for independent runs and grid cells; 0 = hardware concurrency.
  unsigned threads = 0;
};

/// One seeded pass of the whole pipeline: split, train target, build the
/// attack on the shadow side, evaluate on a balanced set of target members and
/// held-out non-members.
RunOutcome run_attack_once(const AttackSetting& setting, std::uint64_t seed);

/// Repeats the pipeline with seeds base_seed .. base_seed + repeats - 1.
AttackReport run_attack_experiment(const AttackSetting& setting, int repeats, std::uint64_t base_seed,
                                   RunOptions options = {});

AttackReport summarize(const AttackSetting& setting, std::vector<RunResult> runs);

struct SweepSeries {
  std::string axis;
  std::vector<double> x;
  std::vector<double> gap;
  std::vector<double> f1;
  std::vector<AttackReport> reports;
};

/// Retrains target and shadow for every epoch budget in the grid.
SweepSeries epoch_sweep(const AttackSetting& setting, const std::vector<int>& epoch_grid, int repeats,
                        std::uint64_t base_seed, RunOptions options = {});

/// Varies num_layers of a DEEP-GCN-residual target and shadow.
SweepSeries depth_sweep(const AttackSetting& setting, const std::vector<int>& layer_grid, int repeats,
                        std::uint64_t base_seed, RunOptions options = {});

struct TransferGrid {
  std::vector<std::string> shadow_labels;  // rows
  std::vector<std::string> target_labels;  // columns
  std::vector<std::vector<AttackReport>> cells;
};

TransferGrid transfer_matrix(const std::vector<ModelSide>& shadows, const std::vector<ModelSide>& targets,
                             const AttackSpec& attack, int repeats, std::uint64_t base_seed,
                             RunOptions options = {});

struct FactorRow {
  double avg_nodes = 0.0;
  double avg_edges = 0.0;
  double density = 0.0;
  double class_count = 0.0;
  double gap = 0.0;
  double f1 = 0.0;
};

struct Correlation {
  std::string factor;
  std::optional<double> rho;
  std::string error;  // set when rho is undefined
};

using CorrelationTable = std::vector<Correlation>;

/// Spearman rho of each factor column against F1. A constant column yields
/// an error entry for that factor only. Needs at least 3 rows.
CorrelationTable factor_correlations(const std::vector<FactorRow>& rows);

/// Factor row for a finished report, graph statistics from the target data.
FactorRow factor_row(const AttackReport& report, const Dataset& target_data);

}  // namespace gmia::eval
