#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gmia/graph.hpp"

namespace gmia::gnn {

enum class Arch { GCN, GIN, GAT, SageMean, DeepGcnResidual, MLP };
enum class Activation { ReLU, Identity };

std::string to_string(Arch arch);
std::string to_string(Activation act);
/// Accepts the canonical names ("GCN", "GIN", "GAT", "SAGE-mean",
/// "DEEP-GCN-residual", "MLP"), case-insensitively.
Arch parse_arch(const std::string& name);
Activation parse_activation(const std::string& name);

struct ModelConfig {
  Arch arch = Arch::GCN;
  int num_layers = 2;
  int hidden_dim = 64;
  double gin_epsilon = 0.0;
  bool gin_learn_epsilon = false;
  int attention_heads = 1;
  /// Concatenate GAT heads (width hidden_dim * heads); otherwise average them.
  bool concat_heads = false;
  Activation activation = Activation::ReLU;

  void validate() const;
  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

struct TrainConfig {
  int epochs = 200;
  double learning_rate = 0.01;
  std::uint64_t seed = 0;

  void validate() const;
  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double train_acc = 0.0;
  std::optional<double> test_acc;
};

/// Class-probability vector returned for one graph.
struct Posterior {
  Vector probs;

  int num_classes() const { return static_cast<int>(probs.size()); }
  /// Index of the largest entry, lowest index on ties.
  int argmax() const;
};

/// Shape and initialization of one parameter tensor.
struct ParamSpec {
  std::string name;
  int rows = 0;
  int cols = 0;
  enum class Init { Glorot, Zero, GinEpsilon } init = Init::Glorot;
  int fan_in = 0;
  int fan_out = 0;
  bool trainable = true;
};

/// Parameter layout for (config, feature_dim, num_classes).
std::vector<ParamSpec> param_layout(const ModelConfig& config, int feature_dim, int num_classes);

/// Graph classifier: config, weights and training history.
struct TrainedModel {
  ModelConfig config;
  int feature_dim = 0;
  int num_classes = 0;
  std::vector<Matrix> weights;
  std::vector<EpochRecord> history;

  /// Freshly initialized model: seeded uniform(-s, s) with
  /// s = sqrt(6 / (fan_in + fan_out)), zero biases.
  static TrainedModel initialize(const ModelConfig& config, int feature_dim, int num_classes,
                                 std::uint64_t seed);
};

/// D^-1/2 (A + I) D^-1/2 with D the degree matrix of A + I.
Matrix normalize_adjacency(const Graph& g);

Posterior forward(const TrainedModel& model, const Graph& g);
std::vector<Posterior> forward_all(const TrainedModel& model, const Dataset& ds);

/// Full-batch gradient descent on mean cross-entropy. `test` only feeds the
/// history. Throws TrainingDiverged on a non-finite loss.
TrainedModel train(const ModelConfig& model_cfg, const TrainConfig& train_cfg, const Dataset& train,
                   const Dataset* test = nullptr);

/// Fraction of graphs whose argmax posterior equals the label.
double evaluate_accuracy(const TrainedModel& model, const Dataset& ds);

/// Max over trainable parameters of |analytic - central difference| /
/// max(|analytic|, |numeric|, 1e-3) for the cross-entropy loss of `g`.
/// Weights (biases and GIN epsilon included) are drawn from `seed` so no
/// activation sits exactly on a kink.
double grad_check(const ModelConfig& config, const Graph& g, double eps, int num_classes = 2,
                  std::uint64_t seed = 0);

}  // namespace gmia::gnn
