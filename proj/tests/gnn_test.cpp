#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numeric>

#include "gmia/error.hpp"
#include "gmia/gnn/checkpoint.hpp"
#include "gmia/gnn/model.hpp"
#include "gmia/random.hpp"

using namespace gmia;
using namespace gmia::gnn;

namespace {

const Arch kAllArchs[] = {Arch::GCN, Arch::GIN, Arch::GAT, Arch::SageMean, Arch::DeepGcnResidual,
                          Arch::MLP};

Graph random_graph(Rng& rng, int n, int dim, double p, int label = 0) {
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<Edge> edges;
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v)
      if (coin(rng) < p) edges.emplace_back(u, v);
  Matrix x(n, dim);
  for (Eigen::Index k = 0; k < x.size(); ++k) x(k) = z(rng);
  return Graph(x, edges, label);
}

ModelConfig small(Arch arch) {
  ModelConfig c;
  c.arch = arch;
  c.hidden_dim = 8;
  return c;
}

Dataset separable_set(std::uint64_t seed) {
  SyntheticSpec spec;
  spec.num_graphs = 100;
  spec.edge_prob_per_class = {0.1, 0.3};
  spec.feature_dim = 4;
  spec.class_shift = 2.0;
  spec.seed = seed;
  return gen_synthetic(spec);
}

}  // namespace

TEST(NormalizeAdjacencyTest, SingleNodeIsOne) {
  const Matrix a = normalize_adjacency(Graph(Matrix::Ones(1, 2), {}, 0));
  ASSERT_EQ(a.rows(), 1);
  EXPECT_DOUBLE_EQ(a(0, 0), 1.0);
}

TEST(NormalizeAdjacencyTest, SingleEdgeIsAllHalves) {
  const Matrix a = normalize_adjacency(Graph(Matrix::Ones(2, 1), {{0, 1}}, 0));
  for (Eigen::Index k = 0; k < 4; ++k) EXPECT_DOUBLE_EQ(a(k), 0.5);
}

TEST(NormalizeAdjacencyTest, Symmetric) {
  Rng rng(3);
  for (int i = 0; i < 20; ++i) {
    const Matrix a = normalize_adjacency(random_graph(rng, 2 + i, 1, 0.4));
    EXPECT_TRUE(a.isApprox(a.transpose(), 0.0));
  }
}

TEST(ForwardTest, UniformPosteriorFromZeroReadout) {
  Rng rng(1);
  const Graph g = random_graph(rng, 5, 3, 0.5);
  for (Arch arch : kAllArchs) {
    TrainedModel m = TrainedModel::initialize(small(arch), 3, 4, 7);
    m.weights[m.weights.size() - 2].setZero();
    m.weights.back().setZero();
    const Posterior p = forward(m, g);
    for (int c = 0; c < 4; ++c) EXPECT_NEAR(p.probs[c], 0.25, 1e-12) << to_string(arch);
  }
}

TEST(ForwardTest, FeatureDimMismatchThrows) {
  Rng rng(1);
  const TrainedModel m = TrainedModel::initialize(small(Arch::GCN), 3, 2, 7);
  EXPECT_THROW(forward(m, random_graph(rng, 4, 2, 0.5)), InvalidArgument);
}

TEST(ForwardTest, IsolatedNodesAreFine) {
  const Graph g(Matrix::Ones(3, 2), {}, 0);
  for (Arch arch : kAllArchs) {
    const Posterior p = forward(TrainedModel::initialize(small(arch), 2, 2, 1), g);
    EXPECT_NEAR(p.probs.sum(), 1.0, 1e-12);
    EXPECT_TRUE(p.probs.allFinite());
  }
}

TEST(ForwardTest, MultiHeadGat) {
  Rng rng(8);
  const Graph g = random_graph(rng, 6, 3, 0.5);
  for (bool concat : {false, true}) {
    ModelConfig c = small(Arch::GAT);
    c.attention_heads = 3;
    c.concat_heads = concat;
    EXPECT_LT(grad_check(c, g, 1e-5, 3, 4), 1e-4);
    std::vector<int> perm{5, 3, 1, 0, 2, 4};
    const TrainedModel m = TrainedModel::initialize(c, 3, 3, 2);
    EXPECT_LT((forward(m, g).probs - forward(m, g.permuted(perm)).probs).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(ArgmaxTest, TiesGoToLowestIndex) {
  Posterior p{Vector::Constant(3, 1.0 / 3.0)};
  EXPECT_EQ(p.argmax(), 0);
  p.probs << 0.2, 0.4, 0.4;
  EXPECT_EQ(p.argmax(), 1);
}

TEST(GradCheckTest, AllArchitectures) {
  for (Arch arch : kAllArchs) {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      Rng rng(100 + seed);
      const Graph g = random_graph(rng, 6, 3, 0.4, 1);
      ModelConfig c = small(arch);
      c.gin_learn_epsilon = true;
      EXPECT_LT(grad_check(c, g, 1e-5, 3, seed), 1e-4) << to_string(arch) << " seed " << seed;
    }
  }
}

TEST(GradCheckTest, DeepResidualStack) {
  Rng rng(9);
  const Graph g = random_graph(rng, 7, 8, 0.4, 0);
  ModelConfig c = small(Arch::DeepGcnResidual);
  c.num_layers = 5;
  EXPECT_LT(grad_check(c, g, 1e-5, 2, 1), 1e-4);
}

TEST(GradCheckTest, LinearModelIsNearExact) {
  Rng rng(4);
  const Graph g = random_graph(rng, 6, 3, 0.5, 1);
  ModelConfig c = small(Arch::GCN);
  c.num_layers = 1;
  c.activation = Activation::Identity;
  EXPECT_LT(grad_check(c, g, 1e-5, 2, 0), 1e-7);
}

TEST(GradCheckTest, RejectsNonPositiveEps) {
  Rng rng(4);
  EXPECT_THROW(grad_check(small(Arch::GCN), random_graph(rng, 3, 2, 0.5), 0.0), InvalidArgument);
}

TEST(TrainTest, ZeroEpochsReturnsInitialization) {
  const Dataset ds = separable_set(1);
  TrainConfig t;
  t.epochs = 0;
  t.seed = 12;
  const TrainedModel m = train(small(Arch::GCN), t, ds);
  EXPECT_TRUE(m.history.empty());
  const TrainedModel init = TrainedModel::initialize(small(Arch::GCN), ds.feature_dim(), 2, 12);
  for (std::size_t i = 0; i < m.weights.size(); ++i) EXPECT_EQ(m.weights[i], init.weights[i]);
}

TEST(TrainTest, SeparableSyntheticReachesHighTrainAccuracy) {
  // Class shift 2.0 makes the set separable at 200 epochs and lr 0.01.
  double total = 0.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Dataset ds = separable_set(seed);
    TrainConfig t;
    t.epochs = 200;
    t.learning_rate = 0.01;
    t.seed = seed;
    ModelConfig c;
    c.hidden_dim = 32;
    const TrainedModel m = train(c, t, ds);
    ASSERT_EQ(m.history.size(), 200u);
    total += evaluate_accuracy(m, ds);
  }
  EXPECT_GE(total / 5.0, 0.95);
}

TEST(TrainTest, BitwiseDeterministic) {
  const Dataset ds = separable_set(2);
  TrainConfig t;
  t.epochs = 15;
  t.learning_rate = 0.05;
  t.seed = 3;
  for (Arch arch : kAllArchs) {
    const TrainedModel a = train(small(arch), t, ds);
    const TrainedModel b = train(small(arch), t, ds);
    for (std::size_t i = 0; i < a.weights.size(); ++i) EXPECT_EQ(a.weights[i], b.weights[i]);
    for (std::size_t e = 0; e < a.history.size(); ++e)
      EXPECT_EQ(a.history[e].train_loss, b.history[e].train_loss);
  }
}

TEST(TrainTest, LossNonIncreasingAtSmallLearningRate) {
  const Dataset ds = separable_set(3);
  TrainConfig t;
  t.epochs = 60;
  t.learning_rate = 1e-3;
  for (Arch arch : kAllArchs) {
    const TrainedModel m = train(small(arch), t, ds);
    for (std::size_t e = 1; e < m.history.size(); ++e) {
      EXPECT_LE(m.history[e].train_loss, m.history[e - 1].train_loss + 1e-6)
          << to_string(arch) << " epoch " << e;
    }
  }
}

TEST(TrainTest, DivergenceReportsEpoch) {
  const Dataset ds = separable_set(4);
  TrainConfig t;
  t.epochs = 50;
  t.learning_rate = 1e300;
  ModelConfig c = small(Arch::MLP);
  c.activation = Activation::Identity;
  try {
    train(c, t, ds);
    FAIL() << "expected divergence";
  } catch (const TrainingDiverged& e) {
    EXPECT_GT(e.epoch(), 1);
  }
}

TEST(TrainTest, InvalidConfigsRejected) {
  const Dataset ds = separable_set(4);
  TrainConfig t;
  t.learning_rate = 0.0;
  EXPECT_THROW(train(small(Arch::GCN), t, ds), InvalidArgument);
  t.learning_rate = 0.1;
  t.epochs = -1;
  EXPECT_THROW(train(small(Arch::GCN), t, ds), InvalidArgument);
  ModelConfig c = small(Arch::GCN);
  c.num_layers = 0;
  EXPECT_THROW(train(c, TrainConfig{}, ds), InvalidArgument);
}

TEST(AccuracyTest, UniformModelPredictsClassZero) {
  const Dataset ds = separable_set(5);
  TrainedModel m = TrainedModel::initialize(small(Arch::GCN), ds.feature_dim(), 2, 0);
  m.weights[m.weights.size() - 2].setZero();
  m.weights.back().setZero();
  std::size_t zeros = 0;
  for (const auto& g : ds.graphs()) zeros += g.label() == 0;
  EXPECT_DOUBLE_EQ(evaluate_accuracy(m, ds), static_cast<double>(zeros) / ds.size());
}

TEST(AccuracyTest, OverfitGcnHasTrainTestGap) {
  SyntheticSpec spec;
  spec.num_graphs = 200;
  spec.edge_prob_per_class = {0.1, 0.3};
  spec.feature_dim = 16;
  spec.seed = 21;
  const auto [tr, te] = split_dataset(gen_synthetic(spec), {0.4, 1});
  TrainConfig t;
  t.epochs = 300;
  t.learning_rate = 0.1;
  ModelConfig c;
  c.hidden_dim = 32;
  const TrainedModel m = train(c, t, tr, &te);
  EXPECT_GT(evaluate_accuracy(m, tr) - evaluate_accuracy(m, te), 0.1);
  ASSERT_TRUE(m.history.back().test_acc.has_value());
}

TEST(CheckpointTest, SaveLoadPreservesOutputs) {
  Rng rng(6);
  const Graph g = random_graph(rng, 7, 3, 0.4);
  const auto path = std::filesystem::temp_directory_path() / "gmia_ckpt_test.json";
  for (Arch arch : kAllArchs) {
    ModelConfig c = small(arch);
    c.gin_learn_epsilon = arch == Arch::GIN;
    TrainedModel m = TrainedModel::initialize(c, 3, 3, 5);
    m.history.push_back({1, 0.5, 0.75, std::nullopt});
    m.history.push_back({2, 0.4, 0.8, 0.6});
    save_checkpoint(m, path);
    const TrainedModel back = load_checkpoint(path);
    EXPECT_EQ(back.config, m.config);
    EXPECT_LT((forward(m, g).probs - forward(back, g).probs).cwiseAbs().maxCoeff(), 1e-12);
    ASSERT_EQ(back.history.size(), 2u);
    EXPECT_FALSE(back.history[0].test_acc);
    EXPECT_EQ(*back.history[1].test_acc, 0.6);
    for (std::size_t i = 0; i < m.weights.size(); ++i) EXPECT_EQ(back.weights[i], m.weights[i]);
  }
}

TEST(CheckpointTest, RejectsUnknownConfigKey) {
  nlohmann::json j = config_to_json(ModelConfig{});
  j["dropout"] = 0.5;
  EXPECT_THROW(config_from_json(j), ParseError);
}
