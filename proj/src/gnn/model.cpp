#include "gmia/gnn/model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "gmia/error.hpp"
#include "gmia/random.hpp"
#include "network.hpp"

namespace gmia::gnn {
namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

int argmax_lowest(const Vector& v) {
  int best = 0;
  for (int i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

std::vector<Matrix> zeros_like(const std::vector<Matrix>& w) {
  std::vector<Matrix> g;
  g.reserve(w.size());
  for (const auto& m : w) g.push_back(Matrix::Zero(m.rows(), m.cols()));
  return g;
}

double cross_entropy(const Vector& logits, int label) {
  const double m = logits.maxCoeff();
  const double lse = m + std::log((logits.array() - m).exp().sum());
  return lse - logits[label];
}

void check_dims(const TrainedModel& model, const Dataset& ds) {
  if (ds.feature_dim() != model.feature_dim) {
    throw InvalidArgument("dataset '" + ds.name() + "' feature_dim " +
                          std::to_string(ds.feature_dim()) + " does not match model feature_dim " +
                          std::to_string(model.feature_dim));
  }
}

}  // namespace

std::string to_string(Arch arch) {
  switch (arch) {
    case Arch::GCN: return "GCN";
    case Arch::GIN: return "GIN";
    case Arch::GAT: return "GAT";
    case Arch::SageMean: return "SAGE-mean";
    case Arch::DeepGcnResidual: return "DEEP-GCN-residual";
    case Arch::MLP: return "MLP";
  }
  return "?";
}

std::string to_string(Activation act) { return act == Activation::ReLU ? "relu" : "identity"; }

Arch parse_arch(const std::string& name) {
  const std::string n = lower(name);
  for (Arch a : {Arch::GCN, Arch::GIN, Arch::GAT, Arch::SageMean, Arch::DeepGcnResidual, Arch::MLP}) {
    if (lower(to_string(a)) == n) return a;
  }
  if (n == "sage" || n == "graphsage") return Arch::SageMean;
  if (n == "deepgcn") return Arch::DeepGcnResidual;
  throw InvalidArgument("unknown architecture '" + name + "'");
}

Activation parse_activation(const std::string& name) {
  const std::string n = lower(name);
  if (n == "relu") return Activation::ReLU;
  if (n == "identity" || n == "linear") return Activation::Identity;
  throw InvalidArgument("unknown activation '" + name + "'");
}

void ModelConfig::validate() const {
  if (num_layers < 1) throw InvalidArgument("num_layers must be >= 1");
  if (hidden_dim < 1) throw InvalidArgument("hidden_dim must be >= 1");
  if (attention_heads < 1) throw InvalidArgument("attention_heads must be >= 1");
  if (!std::isfinite(gin_epsilon)) throw InvalidArgument("gin_epsilon must be finite");
}

void TrainConfig::validate() const {
  if (epochs < 0) throw InvalidArgument("epochs must be >= 0");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw InvalidArgument("learning_rate must be > 0");
  }
}

int Posterior::argmax() const { return argmax_lowest(probs); }

std::vector<ParamSpec> param_layout(const ModelConfig& config, int feature_dim, int num_classes) {
  return detail::Network(config, feature_dim, num_classes).params();
}

TrainedModel TrainedModel::initialize(const ModelConfig& config, int feature_dim, int num_classes,
                                      std::uint64_t seed) {
  TrainedModel m;
  m.config = config;
  m.feature_dim = feature_dim;
  m.num_classes = num_classes;
  Rng rng(seed);
  for (const ParamSpec& spec : param_layout(config, feature_dim, num_classes)) {
    Matrix t = Matrix::Zero(spec.rows, spec.cols);
    switch (spec.init) {
      case ParamSpec::Init::Glorot: {
        const double s = std::sqrt(6.0 / (spec.fan_in + spec.fan_out));
        std::uniform_real_distribution<double> u(-s, s);
        for (Eigen::Index j = 0; j < t.cols(); ++j) {
          for (Eigen::Index i = 0; i < t.rows(); ++i) t(i, j) = u(rng);
        }
        break;
      }
      case ParamSpec::Init::GinEpsilon:
        t(0, 0) = config.gin_epsilon;
        break;
      case ParamSpec::Init::Zero:
        break;
    }
    m.weights.push_back(std::move(t));
  }
  return m;
}

Posterior forward(const TrainedModel& model, const Graph& g) {
  const detail::Network net(model.config, model.feature_dim, model.num_classes);
  const auto pg = net.prepare(g);
  return Posterior{detail::softmax(net.logits(model.weights, pg, nullptr))};
}

std::vector<Posterior> forward_all(const TrainedModel& model, const Dataset& ds) {
  check_dims(model, ds);
  const detail::Network net(model.config, model.feature_dim, model.num_classes);
  std::vector<Posterior> out;
  out.reserve(ds.size());
  for (const Graph& g : ds.graphs()) {
    const auto pg = net.prepare(g);
    out.push_back(Posterior{detail::softmax(net.logits(model.weights, pg, nullptr))});
  }
  return out;
}

double evaluate_accuracy(const TrainedModel& model, const Dataset& ds) {
  const auto posts = forward_all(model, ds);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (posts[i].argmax() == ds[i].label()) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(ds.size());
}

TrainedModel train(const ModelConfig& model_cfg, const TrainConfig& train_cfg, const Dataset& train,
                   const Dataset* test) {
  model_cfg.validate();
  train_cfg.validate();
  if (test && (test->feature_dim() != train.feature_dim() ||
               test->num_classes() != train.num_classes())) {
    throw InvalidArgument("train and test datasets disagree on feature_dim or num_classes");
  }

  TrainedModel model =
      TrainedModel::initialize(model_cfg, train.feature_dim(), train.num_classes(), train_cfg.seed);
  if (train_cfg.epochs == 0) return model;

  const detail::Network net(model_cfg, model.feature_dim, model.num_classes);
  std::vector<detail::PreparedGraph> prepared;
  prepared.reserve(train.size());
  for (const Graph& g : train.graphs()) prepared.push_back(net.prepare(g));
  std::vector<detail::PreparedGraph> prepared_test;
  if (test) {
    for (const Graph& g : test->graphs()) prepared_test.push_back(net.prepare(g));
  }

  const auto& specs = net.params();
  const double inv_n = 1.0 / static_cast<double>(train.size());
  detail::Tape tape;
  for (int epoch = 1; epoch <= train_cfg.epochs; ++epoch) {
    std::vector<Matrix> grads = zeros_like(model.weights);
    double loss = 0.0;
    std::size_t correct = 0;
    for (const auto& pg : prepared) {
      const Vector scores = net.logits(model.weights, pg, &tape);
      const int label = pg.graph->label();
      loss += cross_entropy(scores, label);
      if (argmax_lowest(scores) == label) ++correct;
      Vector d = detail::softmax(scores);
      d[label] -= 1.0;
      net.backward(model.weights, pg, tape, d * inv_n, grads);
    }
    loss *= inv_n;
    if (!std::isfinite(loss)) throw TrainingDiverged(epoch, loss);

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss;
    rec.train_acc = static_cast<double>(correct) * inv_n;
    if (test) {
      std::size_t hits = 0;
      for (const auto& pg : prepared_test) {
        if (argmax_lowest(net.logits(model.weights, pg, nullptr)) == pg.graph->label()) ++hits;
      }
      rec.test_acc = static_cast<double>(hits) / static_cast<double>(test->size());
    }
    model.history.push_back(rec);

    for (std::size_t i = 0; i < model.weights.size(); ++i) {
      if (specs[i].trainable) model.weights[i] -= train_cfg.learning_rate * grads[i];
    }
  }
  return model;
}

double grad_check(const ModelConfig& config, const Graph& g, double eps, int num_classes,
                  std::uint64_t seed) {
  if (!(eps > 0.0)) throw InvalidArgument("eps must be > 0");
  num_classes = std::max(num_classes, g.label() + 1);
  TrainedModel model = TrainedModel::initialize(config, g.feature_dim(), num_classes, seed);
  const detail::Network net(config, model.feature_dim, num_classes);
  const auto& specs = net.params();

  // Non-zero biases and epsilon keep pre-activations off the ReLU kink.
  Rng rng(derive_seed(seed, 1));
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (std::size_t i = 0; i < specs.size(); ++i) {
    if (specs[i].init == ParamSpec::Init::Glorot) continue;
    for (Eigen::Index k = 0; k < model.weights[i].size(); ++k) model.weights[i](k) = u(rng);
  }

  const auto pg = net.prepare(g);
  const auto loss_at = [&](const std::vector<Matrix>& w) {
    return cross_entropy(net.logits(w, pg, nullptr), g.label());
  };

  detail::Tape tape;
  const Vector scores = net.logits(model.weights, pg, &tape);
  Vector d = detail::softmax(scores);
  d[g.label()] -= 1.0;
  std::vector<Matrix> grads = zeros_like(model.weights);
  net.backward(model.weights, pg, tape, d, grads);

  double worst = 0.0;
  std::vector<Matrix> w = model.weights;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (!specs[i].trainable) continue;
    for (Eigen::Index k = 0; k < w[i].size(); ++k) {
      const double orig = w[i](k);
      w[i](k) = orig + eps;
      const double up = loss_at(w);
      w[i](k) = orig - eps;
      const double down = loss_at(w);
      w[i](k) = orig;
      const double numeric = (up - down) / (2.0 * eps);
      const double analytic = grads[i](k);
      const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-3});
      worst = std::max(worst, std::abs(analytic - numeric) / denom);
    }
  }
  return worst;
}

}  // namespace gmia::gnn
