#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace gmia {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

/// Undirected edge between two node indices, stored with first < second.
using Edge = std::pair<int, int>;

/// One graph-classification record: node features, undirected edges, class label.
///
/// Edges are canonicalized on construction (u < v, sorted, deduplicated).
/// Self-loops are rejected; normalization adds them where an architecture
/// needs them.
class Graph {
 public:
  Graph(Matrix node_features, std::vector<Edge> edges, int label);

  int num_nodes() const { return static_cast<int>(features_.rows()); }
  int feature_dim() const { return static_cast<int>(features_.cols()); }
  std::size_t num_edges() const { return edges_.size(); }
  int label() const { return label_; }

  const Matrix& features() const { return features_; }
  const std::vector<Edge>& edges() const { return edges_; }

  /// 2|E| / (n(n-1)); 0 for a single node.
  double density() const;

  /// Same graph with nodes relabeled so that new index perm[i] holds old node i.
  Graph permuted(const std::vector<int>& perm) const;

  friend bool operator==(const Graph& a, const Graph& b);

 private:
  Matrix features_;
  std::vector<Edge> edges_;
  int label_;
};

/// Labeled graph set. Immutable after construction.
class Dataset {
 public:
  Dataset(std::string name, std::vector<Graph> graphs, int num_classes);

  const std::string& name() const { return name_; }
  const std::vector<Graph>& graphs() const { return graphs_; }
  std::size_t size() const { return graphs_.size(); }
  int num_classes() const { return num_classes_; }
  int feature_dim() const { return graphs_.front().feature_dim(); }
  const Graph& operator[](std::size_t i) const { return graphs_[i]; }

  /// Sub-dataset made of the given graph indices, keeping num_classes.
  Dataset subset(const std::vector<std::size_t>& indices, std::string name) const;

  friend bool operator==(const Dataset& a, const Dataset& b);

 private:
  std::string name_;
  std::vector<Graph> graphs_;
  int num_classes_;
};

struct DatasetStats {
  std::size_t graph_count = 0;
  int class_count = 0;
  double avg_nodes = 0.0;
  double avg_edges = 0.0;
  double avg_density = 0.0;
  double avg_degree = 0.0;
};

DatasetStats graph_stats(const Dataset& ds);

struct SplitSpec {
  double ratio = 0.5;
  std::uint64_t seed = 0;
};

/// Seeded disjoint partition. The first part has round(ratio * n) graphs
/// (half-way cases round away from zero).
std::pair<Dataset, Dataset> split_dataset(const Dataset& ds, const SplitSpec& spec);

struct SyntheticSpec {
  std::size_t num_graphs = 200;
  int num_classes = 2;
  int min_nodes = 10;
  int max_nodes = 20;
  std::vector<double> edge_prob_per_class{0.1, 0.3};
  int feature_dim = 8;
  /// Class c shifts feature 0 by class_shift * c.
  double class_shift = 0.5;
  std::uint64_t seed = 0;
  std::string name = "synthetic";
};

/// Class-balanced Erdos-Renyi graphs with Gaussian node features.
Dataset gen_synthetic(const SyntheticSpec& spec);

}  // namespace gmia
