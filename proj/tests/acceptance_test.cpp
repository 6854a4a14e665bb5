// Acceptance suite: one PASS / FAIL / SKIP line per criterion, nonzero exit
// when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>

#include "fixtures.hpp"
#include "gmia/eval/metrics.hpp"
#include "gmia/random.hpp"
#include "gmia/tu_format.hpp"

using namespace gmia;
using namespace gmia::eval;
using attack::MetricKind;

namespace {

struct Outcome {
  enum Status { Pass, Fail, Skip } status = Fail;
  std::string detail;
};

Outcome verdict(bool ok, const std::string& detail) { return {ok ? Outcome::Pass : Outcome::Fail, detail}; }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

const gnn::Arch kArchs[] = {gnn::Arch::GCN, gnn::Arch::GIN, gnn::Arch::GAT, gnn::Arch::SageMean,
                            gnn::Arch::DeepGcnResidual, gnn::Arch::MLP};

Graph random_graph(Rng& rng, int n, int dim, double p) {
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<Edge> edges;
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v)
      if (coin(rng) < p) edges.emplace_back(u, v);
  Matrix x(n, dim);
  for (Eigen::Index k = 0; k < x.size(); ++k) x(k) = z(rng);
  return Graph(x, edges, 0);
}

gnn::Posterior posterior(std::vector<double> v) {
  gnn::Posterior p;
  p.probs = Eigen::Map<Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
  return p;
}

Outcome metric_oracle() {
  struct Case {
    MetricKind kind;
    std::vector<double> probs;
    double expected;
  };
  const std::vector<Case> cases{
      {MetricKind::CrossEntropy, {0.5, 0.5}, std::log(2.0)},
      {MetricKind::CrossEntropy, std::vector<double>(10, 0.1), std::log(10.0)},
      {MetricKind::MSE, {0.6, 0.4}, std::sqrt(0.32)},
      {MetricKind::Cityblock, {0.6, 0.4}, 0.8},
      {MetricKind::Canberra, {0.6, 0.4}, 1.25},
  };
  double worst = 0.0;
  for (const auto& c : cases) {
    worst = std::max(worst, std::abs(attack::metric_value(c.kind, posterior(c.probs)) - c.expected));
  }
  return verdict(worst <= 1e-9, fmt("max abs error %.3g over %zu values", worst, cases.size()));
}

Outcome gradient_check() {
  double worst = 0.0;
  std::string worst_arch;
  for (gnn::Arch arch : kArchs) {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      Rng rng(derive_seed(2024, seed));
      const Graph g = random_graph(rng, 7, 4, 0.4);
      gnn::ModelConfig c;
      c.arch = arch;
      c.hidden_dim = 8;
      c.gin_learn_epsilon = true;
      c.attention_heads = 2;
      const double err = gnn::grad_check(c, g, 1e-5, 3, seed);
      if (err > worst) {
        worst = err;
        worst_arch = gnn::to_string(arch);
      }
    }
  }
  return verdict(worst < 1e-4, fmt("max relative error %.3g (%s), 6 archs x 3 graphs", worst, worst_arch.c_str()));
}

Outcome invariance_suite() {
  Rng rng(77);
  std::uniform_int_distribution<int> arch_pick(0, 5), nodes(1, 12), dim(1, 6), classes(2, 6), layers(1, 3),
      heads(1, 3), coin(0, 1);
  double simplex_err = 0.0, perm_err = 0.0;
  bool nonnegative = true;
  for (int pair = 0; pair < 100; ++pair) {
    gnn::ModelConfig c;
    c.arch = kArchs[arch_pick(rng)];
    c.num_layers = layers(rng);
    c.hidden_dim = 6;
    c.attention_heads = heads(rng);
    c.concat_heads = coin(rng);
    c.gin_epsilon = 0.1 * pair / 100.0;
    const int n = nodes(rng), d = dim(rng), k = classes(rng);
    const Graph g = random_graph(rng, n, d, 0.35);
    const auto model = gnn::TrainedModel::initialize(c, d, k, rng());
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    const Vector p = gnn::forward(model, g).probs;
    const Vector q = gnn::forward(model, g.permuted(perm)).probs;
    simplex_err = std::max(simplex_err, std::abs(p.sum() - 1.0));
    nonnegative = nonnegative && (p.array() >= 0.0).all();
    perm_err = std::max(perm_err, (p - q).cwiseAbs().maxCoeff());
  }
  return verdict(nonnegative && simplex_err < 1e-6 && perm_err < 1e-6,
                 fmt("100 pairs: |sum-1| <= %.3g, permutation diff <= %.3g, nonnegative %s", simplex_err, perm_err,
                     nonnegative ? "yes" : "no"));
}

// Tries every way of cutting the sorted values; returns the best F1 and the
// cut (as the number of member-side values) that is strictest among ties.
double brute_force_threshold(const std::vector<double>& member, const std::vector<double>& non,
                             MetricKind metric, double* best_f1_out) {
  const bool higher = attack::orientation(metric) == attack::Orientation::HigherIsMember;
  std::vector<double> values = member;
  values.insert(values.end(), non.begin(), non.end());
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  const std::size_t distinct = values.size();

  double best_f1 = -1.0;
  std::size_t best_kept = 0;
  // kept = number of distinct values on the member side, taken from the
  // member end of the ordering.
  for (std::size_t kept = 0; kept <= distinct; ++kept) {
    const auto is_member = [&](double v) {
      const std::size_t rank = std::lower_bound(values.begin(), values.end(), v) - values.begin();
      return higher ? rank >= distinct - kept : rank < kept;
    };
    double tp = 0, fp = 0;
    for (double v : member) tp += is_member(v);
    for (double v : non) fp += is_member(v);
    const double fn = member.size() - tp;
    const double f1 = tp == 0 ? 0.0 : 2 * tp / (2 * tp + fp + fn);
    if (f1 > best_f1) {
      best_f1 = f1;
      best_kept = kept;
    }
  }
  *best_f1_out = best_f1;
  if (best_kept == 0) return higher ? values.back() + 1.0 : values.front() - 1.0;
  if (best_kept == distinct) return higher ? values.front() - 1.0 : values.back() + 1.0;
  const std::size_t lo = higher ? distinct - best_kept - 1 : best_kept - 1;
  const double mid = 0.5 * (values[lo] + values[lo + 1]);
  // Neighbours one ulp apart: fall back to the member-side value.
  if (higher && mid <= values[lo]) return values[lo + 1];
  if (!higher && mid >= values[lo + 1]) return values[lo];
  return mid;
}

Outcome threshold_oracle() {
  Rng rng(4242);
  std::uniform_int_distribution<int> size(1, 50), level(0, 10);
  std::normal_distribution<double> z(0.0, 1.0);
  int mismatches = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const MetricKind metric = attack::kAllMetrics[trial % 5];
    std::vector<double> member, non;
    const int m = size(rng), n = size(rng);
    for (int i = 0; i < m; ++i) member.push_back(trial % 3 ? z(rng) + 0.7 : level(rng) / 5.0);
    for (int i = 0; i < n; ++i) non.push_back(trial % 3 ? z(rng) : level(rng) / 5.0 + 0.2);
    double best_f1 = 0.0;
    const double expected = brute_force_threshold(member, non, metric, &best_f1);
    const auto rule = attack::select_threshold(member, non, metric);
    double tp = 0, fp = 0;
    for (double v : member) tp += rule.is_member(v);
    for (double v : non) fp += rule.is_member(v);
    const double f1 = tp == 0 ? 0.0 : 2 * tp / (2 * tp + fp + (m - tp));
    if (rule.threshold != expected || f1 != best_f1) ++mismatches;
  }
  return verdict(mismatches == 0, fmt("%d / 200 instances differ from the exhaustive sweep", mismatches));
}

Outcome overfit_signal() {
  const auto overfit = run_attack_experiment(fixtures::overfit_setting(), 5, 100);
  // The shadow mirrors the target's training recipe, as in the epoch sweep.
  auto control = fixtures::overfit_setting();
  control.target.train.epochs = 0;
  control.shadow.train.epochs = 0;
  const auto untrained = run_attack_experiment(control, 5, 100);
  const bool ok = overfit.gap.mean >= 0.2 && overfit.f1.mean >= 0.6 && untrained.f1.mean >= 0.4 &&
                  untrained.f1.mean <= 0.6;
  return verdict(ok, fmt("gap %.3f, f1 %.3f +- %.3f; 0-epoch target f1 %.3f +- %.3f", overfit.gap.mean,
                         overfit.f1.mean, overfit.f1.std, untrained.f1.mean, untrained.f1.std));
}

Outcome epoch_sweep_comovement() {
  const auto series = epoch_sweep(fixtures::overfit_setting(), {0, 50, 100, 200, 400}, 5, 100);
  const double rho = spearman(series.gap, series.f1);
  std::ostringstream d;
  d << fmt("rho(gap, f1) %.3f;", rho);
  for (std::size_t i = 0; i < series.x.size(); ++i) {
    d << fmt(" e%g:%.2f/%.2f", series.x[i], series.gap[i], series.f1[i]);
  }
  return verdict(rho >= 0.5 && series.gap.back() > series.gap.front(), d.str());
}

Outcome metric_ordering() {
  auto setting = fixtures::overfit_setting(AttackKind::Threshold);
  std::vector<double> f1;
  const MetricKind metrics[] = {MetricKind::CrossEntropy, MetricKind::MSE, MetricKind::Cityblock,
                                MetricKind::Canberra};
  for (MetricKind m : metrics) {
    setting.attack.metric = m;
    f1.push_back(run_attack_experiment(setting, 5, 100).f1.mean);
  }
  const bool ok = f1[0] >= f1[1] && f1[0] >= f1[2] && f1[0] >= f1[3];
  return verdict(ok, fmt("f1 CrossEntropy %.4f, MSE %.4f, Cityblock %.4f, Canberra %.4f", f1[0], f1[1], f1[2],
                         f1[3]));
}

Outcome transferability() {
  const auto base = fixtures::overfit_setting();
  auto gcn = base.target;
  auto gin = fixtures::overfit_side(base.target.data, gnn::Arch::GIN);
  gin.train.learning_rate = 0.03;
  const auto arch = transfer_matrix({gcn, gin}, {gcn, gin}, base.attack, 5, 100);
  double worst_drop = 0.0;
  for (int s = 0; s < 2; ++s) {
    for (int t = 0; t < 2; ++t) {
      if (s != t) worst_drop = std::max(worst_drop, std::abs(arch.cells[t][t].f1.mean - arch.cells[s][t].f1.mean));
    }
  }

  auto two = fixtures::overfit_side(base.target.data, gnn::Arch::GCN, "2-class");
  auto six = fixtures::overfit_side(std::make_shared<const Dataset>(gen_synthetic(fixtures::six_class_spec())),
                                    gnn::Arch::GCN, "6-class");
  const auto cross = transfer_matrix({two, six}, {two, six}, base.attack, 5, 100);
  double min_cross = 1.0, min_gap = 1.0;
  for (const auto& row : cross.cells) {
    for (const auto& cell : row) {
      min_cross = std::min(min_cross, cell.f1.mean);
      min_gap = std::min(min_gap, cell.gap.mean);
    }
  }
  const auto& c = arch.cells;
  return verdict(worst_drop <= 0.15 && min_cross > 0.5,
                 fmt("arch grid [GCN,GIN]x[GCN,GIN] f1 %.3f %.3f / %.3f %.3f, max |diag-offdiag| %.3f; "
                     "2/6-class grid min f1 %.3f (target gaps >= %.3f)",
                     c[0][0].f1.mean, c[0][1].f1.mean, c[1][0].f1.mean, c[1][1].f1.mean, worst_drop, min_cross,
                     min_gap));
}

Outcome factor_pattern() {
  std::vector<FactorRow> rows;
  const std::pair<int, int> node_ranges[] = {{5, 10}, {8, 16}, {12, 24}};
  const std::vector<double> edge_probs[] = {{0.1, 0.3}, {0.2, 0.4}};
  for (const auto& [lo, hi] : node_ranges) {
    for (const auto& probs : edge_probs) {
      SyntheticSpec spec = fixtures::overfit_data_spec();
      spec.min_nodes = lo;
      spec.max_nodes = hi;
      spec.edge_prob_per_class = probs;
      const auto data = std::make_shared<const Dataset>(gen_synthetic(spec));
      for (int epochs : {0, 30, 300}) {
        AttackSetting s;
        s.name = "factor";
        s.target = fixtures::overfit_side(data);
        s.target.train.epochs = epochs;
        s.shadow = s.target;
        rows.push_back(factor_row(run_attack_experiment(s, 3, 100), *data));
      }
    }
  }
  const auto table = factor_correlations(rows);
  const auto rho = [&](const std::string& name) {
    for (const auto& c : table)
      if (c.factor == name && c.rho) return std::abs(*c.rho);
    return std::nan("");
  };
  const double gap = rho("train_test_gap"), n = rho("avg_nodes"), e = rho("avg_edges"), d = rho("density");
  const bool ok = gap > n && gap > e && gap > d;
  return verdict(ok, fmt("%zu settings: |rho| gap %.3f, avg_nodes %.3f, avg_edges %.3f, density %.3f", rows.size(), gap,
                         n, e, d));
}

std::filesystem::path proteins_dir() {
  if (const char* env = std::getenv("GMIA_PROTEINS_DIR")) return env;
  return std::filesystem::path(GMIA_DATA_DIR) / "PROTEINS_full";
}

Outcome real_data_smoke() {
  const auto dir = proteins_dir();
  if (!std::filesystem::is_directory(dir)) {
    return {Outcome::Skip, "no PROTEINS_full data at " + dir.string() + " (set GMIA_PROTEINS_DIR)"};
  }
  const auto data = std::make_shared<const Dataset>(parse_tu_dataset(dir, "PROTEINS_full"));
  const DatasetStats s = graph_stats(*data);
  const auto within = [](double got, double want) { return std::abs(got - want) <= 0.01 * want; };
  const bool stats_ok = within(static_cast<double>(s.graph_count), 1113) && s.class_count == 2 &&
                        within(s.avg_nodes, 39.06);

  AttackSetting setting;
  setting.name = "proteins-gcn";
  setting.target.label = "GCN";
  setting.target.data = data;
  setting.target.model.hidden_dim = 64;
  setting.target.train.epochs = 400;
  setting.target.train.learning_rate = 0.05;
  setting.shadow = setting.target;
  const auto report = run_attack_experiment(setting, 5, 100);
  double train_acc = 0.0;
  for (const auto& r : report.runs) train_acc += r.target_train_acc / report.runs.size();
  const bool ok = stats_ok && train_acc >= 0.95 && report.f1.mean >= 0.5 && report.f1.mean <= 0.85;
  return verdict(ok, fmt("graphs %zu, classes %d, avg nodes %.2f, avg edges %.2f; train acc %.3f, f1 %.3f +- %.3f",
                         s.graph_count, s.class_count, s.avg_nodes, s.avg_edges, train_acc, report.f1.mean,
                         report.f1.std));
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"metric unit oracle", metric_oracle},
      {"gradient correctness", gradient_check},
      {"posterior invariance", invariance_suite},
      {"threshold selection oracle", threshold_oracle},
      {"overfitting gives attack signal", overfit_signal},
      {"epoch sweep co-movement", epoch_sweep_comovement},
      {"cross-entropy metric ordering", metric_ordering},
      {"transferability", transferability},
      {"factor correlation pattern", factor_pattern},
      {"real-data smoke test", real_data_smoke},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = criteria[i].second();
    } catch (const std::exception& e) {
      out = {Outcome::Fail, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const char* tag = out.status == Outcome::Pass ? "PASS" : out.status == Outcome::Skip ? "SKIP" : "FAIL";
    failures += out.status == Outcome::Fail;
    std::printf("[%s] %2zu %s (%.1fs): %s\n", tag, i + 1, criteria[i].first.c_str(), secs, out.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
