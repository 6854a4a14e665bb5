#pragma once

// Desk-scale settings shared by the eval and acceptance suites.

#include <memory>

#include "gmia/eval/experiment.hpp"

namespace gmia::fixtures {

/// 200 two-class graphs, edge probabilities 0.1 / 0.3, 5-10 nodes and 32
/// noisy features: small enough that a 2-layer GCN trained on 50 graphs
/// memorizes them.
inline SyntheticSpec overfit_data_spec(std::uint64_t seed = 1) {
  SyntheticSpec spec;
  spec.num_graphs = 200;
  spec.num_classes = 2;
  spec.min_nodes = 5;
  spec.max_nodes = 10;
  spec.edge_prob_per_class = {0.1, 0.3};
  spec.feature_dim = 32;
  spec.seed = seed;
  spec.name = "synthetic-2class";
  return spec;
}

/// Six classes over the same node range, 0.05 apart in edge probability.
inline SyntheticSpec six_class_spec(std::uint64_t seed = 2) {
  SyntheticSpec spec = overfit_data_spec(seed);
  spec.num_classes = 6;
  spec.edge_prob_per_class = {0.1, 0.15, 0.2, 0.25, 0.3, 0.35};
  spec.name = "synthetic-6class";
  return spec;
}

inline eval::ModelSide overfit_side(std::shared_ptr<const Dataset> data, gnn::Arch arch = gnn::Arch::GCN,
                                    std::string label = "") {
  eval::ModelSide side;
  side.label = label.empty() ? gnn::to_string(arch) : std::move(label);
  side.data = std::move(data);
  side.model.arch = arch;
  side.model.num_layers = 2;
  side.model.hidden_dim = 32;
  side.train.epochs = 300;
  side.train.learning_rate = 0.1;
  return side;
}

inline eval::AttackSetting overfit_setting(eval::AttackKind kind = eval::AttackKind::Training) {
  auto data = std::make_shared<const Dataset>(gen_synthetic(overfit_data_spec()));
  eval::AttackSetting s;
  s.name = "overfit-gcn";
  s.target = overfit_side(data);
  s.shadow = s.target;
  s.attack.kind = kind;
  return s;
}

}  // namespace gmia::fixtures
