#include "gmia/attack/shadow_attack.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "gmia/error.hpp"
#include "gmia/gnn/checkpoint.hpp"
#include "gmia/io.hpp"
#include "gmia/random.hpp"

namespace gmia::attack {
namespace {

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow.
double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

}  // namespace

void AttackModelConfig::validate() const {
  if (k < 0) throw InvalidArgument("attack k must be >= 1 (or 0 for the default)");
  if (hidden_dim < 1) throw InvalidArgument("attack hidden_dim must be >= 1");
  if (epochs < 0) throw InvalidArgument("attack epochs must be >= 0");
  if (!(learning_rate > 0.0)) throw InvalidArgument("attack learning_rate must be > 0");
  if (!(decision_threshold > 0.0 && decision_threshold < 1.0)) {
    throw InvalidArgument("decision_threshold must lie in (0, 1)");
  }
}

int default_k(int shadow_classes, int target_classes) {
  return std::min({10, shadow_classes, target_classes});
}

double AttackModel::score(const Vector& features) const {
  if (features.size() != feature_mean.size()) {
    throw InvalidArgument("attack input has length " + std::to_string(features.size()) +
                          ", model expects " + std::to_string(feature_mean.size()));
  }
  const RowVector x = ((features - feature_mean).array() / feature_scale.array()).matrix().transpose();
  const RowVector hidden = (x * w1 + b1).cwiseMax(0.0);
  return sigmoid(hidden.dot(w2.transpose()) + b2);
}

std::pair<Dataset, Dataset> split_shadow(const Dataset& shadow, std::uint64_t seed) {
  if (shadow.size() < 2) throw InvalidArgument("shadow dataset needs at least 2 graphs");
  auto [member, non_member] = split_dataset(shadow, {0.5, seed});
  return {std::move(member), std::move(non_member)};
}

gnn::TrainedModel train_shadow(const gnn::ModelConfig& model_cfg, const gnn::TrainConfig& train_cfg,
                               const Dataset& member) {
  return gnn::train(model_cfg, train_cfg, member, nullptr);
}

Vector distill_topk(const gnn::Posterior& p, int k) {
  if (k < 1) throw InvalidArgument("k must be >= 1");
  std::vector<double> v(p.probs.data(), p.probs.data() + p.probs.size());
  std::sort(v.begin(), v.end(), std::greater<>());
  Vector out = Vector::Zero(k);
  for (int i = 0; i < k && i < static_cast<int>(v.size()); ++i) out[i] = v[static_cast<std::size_t>(i)];
  return out;
}

std::vector<AttackRecord> gather_attack_records(const gnn::TrainedModel& shadow_model,
                                                const Dataset& member, const Dataset& non_member,
                                                int k) {
  std::vector<AttackRecord> records;
  records.reserve(member.size() + non_member.size());
  for (const auto& p : gnn::forward_all(shadow_model, member)) {
    records.push_back({distill_topk(p, k), 1});
  }
  for (const auto& p : gnn::forward_all(shadow_model, non_member)) {
    records.push_back({distill_topk(p, k), 0});
  }
  return records;
}

AttackModel train_attack_model(const std::vector<AttackRecord>& records, const AttackModelConfig& cfg) {
  cfg.validate();
  if (records.empty()) throw InvalidArgument("no attack records");
  const auto k = records.front().features.size();
  if (k < 1) throw InvalidArgument("attack records have empty features");
  if (cfg.k > 0 && cfg.k != k) {
    throw InvalidArgument("attack records have length " + std::to_string(k) + ", config k is " +
                          std::to_string(cfg.k));
  }
  std::size_t positives = 0;
  for (const auto& r : records) {
    if (r.features.size() != k) throw InvalidArgument("attack records differ in length");
    if (r.label != 0 && r.label != 1) throw InvalidArgument("attack record label must be 0 or 1");
    positives += static_cast<std::size_t>(r.label);
  }
  if (positives == 0 || positives == records.size()) {
    throw InvalidArgument("attack training needs both member and non-member records");
  }

  const auto n = static_cast<Eigen::Index>(records.size());
  Matrix x(n, k);
  Vector y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    x.row(i) = records[static_cast<std::size_t>(i)].features.transpose();
    y[i] = records[static_cast<std::size_t>(i)].label;
  }

  AttackModel m;
  m.config = cfg;
  m.config.k = static_cast<int>(k);
  m.feature_mean = x.colwise().mean().transpose();
  m.feature_scale = ((x.rowwise() - m.feature_mean.transpose()).array().square().colwise().mean().sqrt())
                        .matrix()
                        .transpose();
  for (Eigen::Index j = 0; j < m.feature_scale.size(); ++j) {
    if (!(m.feature_scale[j] > 1e-12)) m.feature_scale[j] = 1.0;
  }
  const Matrix xs = (x.rowwise() - m.feature_mean.transpose()).array().rowwise() /
                    m.feature_scale.transpose().array();

  const int h = cfg.hidden_dim;
  Rng rng(cfg.seed);
  const double s1 = std::sqrt(6.0 / static_cast<double>(k + h));
  const double s2 = std::sqrt(6.0 / (h + 1.0));
  std::uniform_real_distribution<double> u1(-s1, s1), u2(-s2, s2);
  m.w1.resize(k, h);
  for (Eigen::Index i = 0; i < m.w1.size(); ++i) m.w1(i) = u1(rng);
  m.b1 = RowVector::Zero(h);
  m.w2.resize(h);
  for (Eigen::Index i = 0; i < h; ++i) m.w2[i] = u2(rng);
  m.b2 = 0.0;

  const double inv_n = 1.0 / static_cast<double>(n);
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const Matrix pre = (xs * m.w1).rowwise() + m.b1;
    const Matrix hidden = pre.cwiseMax(0.0);
    const Vector z = (hidden * m.w2).array() + m.b2;
    double loss = 0.0;
    Vector dz(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      loss += softplus(z[i]) - y[i] * z[i];
      dz[i] = (sigmoid(z[i]) - y[i]) * inv_n;
    }
    if (!std::isfinite(loss)) throw TrainingDiverged(epoch, loss);
    const Vector dw2 = hidden.transpose() * dz;
    const double db2 = dz.sum();
    const Matrix dhidden = dz * m.w2.transpose();
    const Matrix dpre = (pre.array() > 0.0).select(dhidden, 0.0);
    m.w1 -= cfg.learning_rate * (xs.transpose() * dpre);
    m.b1 -= cfg.learning_rate * dpre.colwise().sum();
    m.w2 -= cfg.learning_rate * dw2;
    m.b2 -= cfg.learning_rate * db2;
  }
  return m;
}

MembershipInference infer_from_features(const AttackModel& attack, const Vector& features) {
  MembershipInference out;
  out.score = attack.score(features);
  out.flag = out.score >= attack.config.decision_threshold ? 1 : 0;
  return out;
}

MembershipInference infer_membership(const AttackModel& attack, const gnn::TrainedModel& target,
                                     const Graph& g, int k) {
  return infer_from_features(attack, distill_topk(gnn::forward(target, g), k));
}

std::string records_to_csv(const std::vector<AttackRecord>& records) {
  std::ostringstream out;
  const auto k = records.empty() ? 0 : records.front().features.size();
  for (Eigen::Index i = 0; i < k; ++i) out << 'f' << i + 1 << ',';
  out << "label\n";
  for (const auto& r : records) {
    for (Eigen::Index i = 0; i < r.features.size(); ++i) out << io::format_double(r.features[i]) << ',';
    out << r.label << '\n';
  }
  return out.str();
}

nlohmann::json attack_config_to_json(const AttackModelConfig& c) {
  return {{"k", c.k},
          {"hidden_dim", c.hidden_dim},
          {"epochs", c.epochs},
          {"learning_rate", c.learning_rate},
          {"seed", c.seed},
          {"decision_threshold", c.decision_threshold}};
}

AttackModelConfig attack_config_from_json(const nlohmann::json& j) {
  AttackModelConfig c;
  for (const auto& [key, value] : j.items()) {
    if (key == "k") c.k = value.get<int>();
    else if (key == "hidden_dim") c.hidden_dim = value.get<int>();
    else if (key == "epochs") c.epochs = value.get<int>();
    else if (key == "learning_rate") c.learning_rate = value.get<double>();
    else if (key == "seed") c.seed = value.get<std::uint64_t>();
    else if (key == "decision_threshold") c.decision_threshold = value.get<double>();
    else throw ParseError("unknown attack config key '" + key + "'");
  }
  c.validate();
  return c;
}

nlohmann::json attack_checkpoint_to_json(const AttackModel& m) {
  return {{"format", "gmia.attack"},
          {"version", gnn::kCheckpointVersion},
          {"config", attack_config_to_json(m.config)},
          {"feature_mean", io::matrix_to_json(m.feature_mean)},
          {"feature_scale", io::matrix_to_json(m.feature_scale)},
          {"w1", io::matrix_to_json(m.w1)},
          {"b1", io::matrix_to_json(m.b1)},
          {"w2", io::matrix_to_json(m.w2)},
          {"b2", m.b2}};
}

AttackModel attack_checkpoint_from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "gmia.attack") throw ParseError("not a gmia attack checkpoint");
  if (j.at("version").get<int>() != gnn::kCheckpointVersion) {
    throw ParseError("unsupported checkpoint version " + j.at("version").dump());
  }
  AttackModel m;
  m.config = attack_config_from_json(j.at("config"));
  m.feature_mean = io::matrix_from_json(j.at("feature_mean"));
  m.feature_scale = io::matrix_from_json(j.at("feature_scale"));
  m.w1 = io::matrix_from_json(j.at("w1"));
  m.b1 = io::matrix_from_json(j.at("b1"));
  m.w2 = io::matrix_from_json(j.at("w2"));
  m.b2 = j.at("b2").get<double>();
  const auto k = m.feature_mean.size();
  const auto h = m.w2.size();
  if (m.feature_scale.size() != k || m.w1.rows() != k || m.w1.cols() != h || m.b1.size() != h) {
    throw ParseError("attack checkpoint tensors have inconsistent shapes");
  }
  return m;
}

void save_attack_checkpoint(const AttackModel& m, const std::filesystem::path& path) {
  io::atomic_write(path, attack_checkpoint_to_json(m).dump(1) + "\n");
}

AttackModel load_attack_checkpoint(const std::filesystem::path& path) {
  return attack_checkpoint_from_json(nlohmann::json::parse(io::read_file(path)));
}

}  // namespace gmia::attack
