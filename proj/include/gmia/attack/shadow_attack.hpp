#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "gmia/gnn/model.hpp"

namespace gmia::attack {

/// Distilled confidence vector with its membership flag (1 = in, 0 = out).
struct AttackRecord {
  Vector features;
  int label = 0;
};

struct AttackModelConfig {
  /// Distillation width; 0 picks min(10, shadow classes, target classes).
  int k = 0;
  int hidden_dim = 64;
  int epochs = 500;
  double learning_rate = 0.1;
  std::uint64_t seed = 0;
  double decision_threshold = 0.5;

  void validate() const;
};

int default_k(int shadow_classes, int target_classes);

/// One-hidden-layer ReLU network with a sigmoid output. Inputs are
/// standardized with the training-set mean and scale.
struct AttackModel {
  AttackModelConfig config;
  Vector feature_mean;
  Vector feature_scale;
  Matrix w1;  // k x hidden
  RowVector b1;
  Vector w2;  // hidden
  double b2 = 0.0;

  int k() const { return static_cast<int>(feature_mean.size()); }
  /// Membership score in (0, 1).
  double score(const Vector& features) const;
};

/// Member / non-member halves of the shadow data, via split_dataset(0.5).
std::pair<Dataset, Dataset> split_shadow(const Dataset& shadow, std::uint64_t seed);

/// Trains the surrogate on the member half only. Same contract as gnn::train.
gnn::TrainedModel train_shadow(const gnn::ModelConfig& model_cfg, const gnn::TrainConfig& train_cfg,
                               const Dataset& member);

/// k largest entries in non-increasing order, zero-padded when k > classes.
Vector distill_topk(const gnn::Posterior& p, int k);

/// One record per graph: member graphs labeled in, non-member graphs out.
std::vector<AttackRecord> gather_attack_records(const gnn::TrainedModel& shadow_model,
                                                const Dataset& member, const Dataset& non_member,
                                                int k);

/// Full-batch gradient descent on binary cross-entropy. Throws
/// InvalidArgument unless both labels are present.
AttackModel train_attack_model(const std::vector<AttackRecord>& records, const AttackModelConfig& cfg);

struct MembershipInference {
  int flag = 0;
  double score = 0.0;
};

/// flag = score >= decision_threshold.
MembershipInference infer_membership(const AttackModel& attack, const gnn::TrainedModel& target,
                                     const Graph& g, int k);
MembershipInference infer_from_features(const AttackModel& attack, const Vector& features);

/// CSV with header f1,...,fk,label.
std::string records_to_csv(const std::vector<AttackRecord>& records);

nlohmann::json attack_config_to_json(const AttackModelConfig& c);
AttackModelConfig attack_config_from_json(const nlohmann::json& j);

nlohmann::json attack_checkpoint_to_json(const AttackModel& m);
AttackModel attack_checkpoint_from_json(const nlohmann::json& j);
void save_attack_checkpoint(const AttackModel& m, const std::filesystem::path& path);
AttackModel load_attack_checkpoint(const std::filesystem::path& path);

}  // namespace gmia::attack
