#include "gmia/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gmia/error.hpp"
#include "gmia/random.hpp"

namespace gmia {

Graph::Graph(Matrix node_features, std::vector<Edge> edges, int label)
    : features_(std::move(node_features)), label_(label) {
  const int n = static_cast<int>(features_.rows());
  if (n < 1) throw InvalidArgument("graph must have at least one node");
  if (label < 0) throw InvalidArgument("graph label must be non-negative");
  for (auto& [u, v] : edges) {
    if (u < 0 || v < 0 || u >= n || v >= n) {
      throw InvalidArgument("edge (" + std::to_string(u) + ", " + std::to_string(v) +
                            ") out of range for " + std::to_string(n) + " nodes");
    }
    if (u == v) throw InvalidArgument("self-loop on node " + std::to_string(u));
    if (u > v) std::swap(u, v);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  edges_ = std::move(edges);
}

double Graph::density() const {
  const double n = num_nodes();
  if (n < 2) return 0.0;
  return 2.0 * static_cast<double>(edges_.size()) / (n * (n - 1.0));
}

Graph Graph::permuted(const std::vector<int>& perm) const {
  const int n = num_nodes();
  if (static_cast<int>(perm.size()) != n) throw InvalidArgument("permutation size mismatch");
  Matrix x(n, feature_dim());
  for (int i = 0; i < n; ++i) x.row(perm[i]) = features_.row(i);
  std::vector<Edge> e;
  e.reserve(edges_.size());
  for (const auto& [u, v] : edges_) e.emplace_back(perm[u], perm[v]);
  return Graph(std::move(x), std::move(e), label_);
}

bool operator==(const Graph& a, const Graph& b) {
  return a.label_ == b.label_ && a.edges_ == b.edges_ &&
         a.features_.rows() == b.features_.rows() && a.features_.cols() == b.features_.cols() &&
         a.features_ == b.features_;
}

Dataset::Dataset(std::string name, std::vector<Graph> graphs, int num_classes)
    : name_(std::move(name)), graphs_(std::move(graphs)), num_classes_(num_classes) {
  if (graphs_.empty()) throw InvalidArgument("dataset '" + name_ + "' is empty");
  if (num_classes_ < 1) throw InvalidArgument("dataset needs at least one class");
  const int dim = graphs_.front().feature_dim();
  for (std::size_t i = 0; i < graphs_.size(); ++i) {
    if (graphs_[i].feature_dim() != dim) {
      throw InvalidArgument("graph " + std::to_string(i) + " has feature_dim " +
                            std::to_string(graphs_[i].feature_dim()) + ", expected " +
                            std::to_string(dim));
    }
    if (graphs_[i].label() >= num_classes_) {
      throw InvalidArgument("graph " + std::to_string(i) + " label " +
                            std::to_string(graphs_[i].label()) + " >= num_classes " +
                            std::to_string(num_classes_));
    }
  }
}

Dataset Dataset::subset(const std::vector<std::size_t>& indices, std::string name) const {
  std::vector<Graph> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(graphs_.at(i));
  return Dataset(std::move(name), std::move(out), num_classes_);
}

bool operator==(const Dataset& a, const Dataset& b) {
  return a.name_ == b.name_ && a.num_classes_ == b.num_classes_ && a.graphs_ == b.graphs_;
}

DatasetStats graph_stats(const Dataset& ds) {
  DatasetStats s;
  s.graph_count = ds.size();
  s.class_count = ds.num_classes();
  for (const auto& g : ds.graphs()) {
    s.avg_nodes += g.num_nodes();
    s.avg_edges += static_cast<double>(g.num_edges());
    s.avg_density += g.density();
    s.avg_degree += 2.0 * static_cast<double>(g.num_edges()) / g.num_nodes();
  }
  const double count = static_cast<double>(ds.size());
  s.avg_nodes /= count;
  s.avg_edges /= count;
  s.avg_density /= count;
  s.avg_degree /= count;
  return s;
}

std::pair<Dataset, Dataset> split_dataset(const Dataset& ds, const SplitSpec& spec) {
  if (!(spec.ratio > 0.0 && spec.ratio < 1.0)) {
    throw InvalidArgument("split ratio must lie in (0, 1), got " + std::to_string(spec.ratio));
  }
  const std::size_t n = ds.size();
  const auto first = static_cast<std::size_t>(std::lround(spec.ratio * static_cast<double>(n)));
  if (first == 0 || first == n) {
    throw InvalidArgument("split of " + std::to_string(n) + " graphs at ratio " +
                          std::to_string(spec.ratio) + " leaves an empty part");
  }
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng(spec.seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  std::vector<std::size_t> a(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(first));
  std::vector<std::size_t> b(idx.begin() + static_cast<std::ptrdiff_t>(first), idx.end());
  return {ds.subset(a, ds.name() + "/a"), ds.subset(b, ds.name() + "/b")};
}

Dataset gen_synthetic(const SyntheticSpec& spec) {
  if (spec.num_graphs == 0) throw InvalidArgument("num_graphs must be positive");
  if (spec.num_classes < 1) throw InvalidArgument("num_classes must be positive");
  if (spec.min_nodes < 1 || spec.max_nodes < spec.min_nodes) {
    throw InvalidArgument("invalid node range [" + std::to_string(spec.min_nodes) + ", " +
                          std::to_string(spec.max_nodes) + "]");
  }
  if (spec.feature_dim < 1) throw InvalidArgument("feature_dim must be positive");
  if (spec.edge_prob_per_class.size() != static_cast<std::size_t>(spec.num_classes)) {
    throw InvalidArgument("need one edge probability per class");
  }
  for (double p : spec.edge_prob_per_class) {
    if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("edge probability out of [0, 1]");
  }

  Rng rng(spec.seed);
  std::uniform_int_distribution<int> node_count(spec.min_nodes, spec.max_nodes);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, 1.0);

  std::vector<Graph> graphs;
  graphs.reserve(spec.num_graphs);
  for (std::size_t i = 0; i < spec.num_graphs; ++i) {
    const int label = static_cast<int>(i % static_cast<std::size_t>(spec.num_classes));
    const double p = spec.edge_prob_per_class[static_cast<std::size_t>(label)];
    const int n = node_count(rng);
    std::vector<Edge> edges;
    for (int u = 0; u < n; ++u) {
      for (int v = u + 1; v < n; ++v) {
        if (coin(rng) < p) edges.emplace_back(u, v);
      }
    }
    Matrix x(n, spec.feature_dim);
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < spec.feature_dim; ++c) x(r, c) = noise(rng);
    }
    x.col(0).array() += spec.class_shift * label;
    graphs.emplace_back(std::move(x), std::move(edges), label);
  }
  return Dataset(spec.name, std::move(graphs), spec.num_classes);
}

}  // namespace gmia
