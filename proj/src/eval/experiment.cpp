#include "gmia/eval/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <exception>
#include <functional>
#include <numeric>
#include <thread>

#include "gmia/error.hpp"
#include "gmia/random.hpp"

namespace gmia::eval {
namespace {

// Seed streams of one run.
enum Stream : std::uint64_t {
  kDomainSplit = 1,
  kTargetSplit,
  kShadowSplit,
  kTargetTrain,
  kShadowTrain,
  kAttackTrain,
  kEvalSample,
};

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          body(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  pool.clear();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

void check_side(const ModelSide& side, const char* role) {
  if (!side.data) throw InvalidArgument(std::string(role) + " side '" + side.label + "' has no dataset");
  side.model.validate();
  side.train.validate();
}

// First n graphs of a seeded shuffle.
Dataset sample(const Dataset& ds, std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> idx(ds.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  idx.resize(n);
  std::sort(idx.begin(), idx.end());
  return ds.subset(idx, ds.name());
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

}  // namespace

std::string to_string(AttackKind kind) { return kind == AttackKind::Training ? "training" : "threshold"; }

AttackKind parse_attack_kind(const std::string& name) {
  const std::string n = lower(name);
  if (n == "training") return AttackKind::Training;
  if (n == "threshold") return AttackKind::Threshold;
  throw InvalidArgument("unknown attack kind '" + name + "' (expected training or threshold)");
}

RunOutcome run_attack_once(const AttackSetting& setting, std::uint64_t seed) {
  check_side(setting.target, "target");
  check_side(setting.shadow, "shadow");

  // Disjoint target-side and shadow-side data.
  auto [target_half, other_half] = split_dataset(*setting.target.data, {0.5, derive_seed(seed, kDomainSplit)});
  Dataset shadow_side = other_half;
  if (setting.shadow.data != setting.target.data) {
    shadow_side = split_dataset(*setting.shadow.data, {0.5, derive_seed(seed, kDomainSplit)}).second;
  }

  auto [target_members, target_held_out] =
      split_dataset(target_half, {0.5, derive_seed(seed, kTargetSplit)});
  gnn::TrainConfig target_train = setting.target.train;
  target_train.seed = derive_seed(seed, kTargetTrain);
  const gnn::TrainedModel target = gnn::train(setting.target.model, target_train, target_members);

  RunOutcome out;
  RunResult& r = out.result;
  r.seed = seed;
  r.target_train_acc = gnn::evaluate_accuracy(target, target_members);
  r.target_test_acc = gnn::evaluate_accuracy(target, target_held_out);
  r.gap = r.target_train_acc - r.target_test_acc;

  // Attack construction sees only the shadow side.
  auto [shadow_members, shadow_non_members] = attack::split_shadow(shadow_side, derive_seed(seed, kShadowSplit));
  gnn::TrainConfig shadow_train = setting.shadow.train;
  shadow_train.seed = derive_seed(seed, kShadowTrain);
  const gnn::TrainedModel shadow = attack::train_shadow(setting.shadow.model, shadow_train, shadow_members);

  // Balanced evaluation set.
  const std::size_t n_eval = std::min(target_members.size(), target_held_out.size());
  const Dataset eval_members = n_eval == target_members.size()
                                   ? target_members
                                   : sample(target_members, n_eval, derive_seed(seed, kEvalSample));
  const Dataset eval_non = n_eval == target_held_out.size()
                               ? target_held_out
                               : sample(target_held_out, n_eval, derive_seed(seed, kEvalSample) + 1);
  std::vector<int> actual(n_eval, 1);
  actual.resize(2 * n_eval, 0);
  const auto member_posts = gnn::forward_all(target, eval_members);
  const auto non_posts = gnn::forward_all(target, eval_non);
  std::vector<gnn::Posterior> posts = member_posts;
  posts.insert(posts.end(), non_posts.begin(), non_posts.end());

  std::vector<int> predicted;
  predicted.reserve(posts.size());
  if (setting.attack.kind == AttackKind::Training) {
    attack::AttackModelConfig cfg = setting.attack.model;
    cfg.seed = derive_seed(seed, kAttackTrain);
    const int k = cfg.k > 0 ? cfg.k : attack::default_k(shadow.num_classes, target.num_classes);
    cfg.k = k;
    out.attack_records = attack::gather_attack_records(shadow, shadow_members, shadow_non_members, k);
    const attack::AttackModel model = attack::train_attack_model(out.attack_records, cfg);
    for (const auto& p : posts) {
      predicted.push_back(attack::infer_from_features(model, attack::distill_topk(p, k)).flag);
    }
    r.k = k;
  } else {
    const auto metric = setting.attack.metric;
    std::vector<double> ref_member, ref_non;
    for (const auto& p : gnn::forward_all(shadow, shadow_members)) ref_member.push_back(attack::metric_value(metric, p));
    for (const auto& p : gnn::forward_all(shadow, shadow_non_members)) ref_non.push_back(attack::metric_value(metric, p));
    for (double v : ref_member) out.reference_samples.push_back({v, 1});
    for (double v : ref_non) out.reference_samples.push_back({v, 0});
    const attack::ThresholdRule rule =
        attack::select_threshold(ref_member, ref_non, metric, setting.attack.objective);
    for (const auto& p : posts) predicted.push_back(rule.is_member(attack::metric_value(metric, p)) ? 1 : 0);
    r.threshold = rule.threshold;
  }
  r.scores = attack_metrics(predicted, actual);
  return out;
}

AttackReport summarize(const AttackSetting& setting, std::vector<RunResult> runs) {
  AttackReport rep;
  rep.setting = setting.name;
  rep.target_label = setting.target.label;
  rep.shadow_label = setting.shadow.label;
  rep.target_arch = gnn::to_string(setting.target.model.arch);
  rep.shadow_arch = gnn::to_string(setting.shadow.model.arch);
  rep.target_dataset = setting.target.data ? setting.target.data->name() : "";
  rep.shadow_dataset = setting.shadow.data ? setting.shadow.data->name() : "";
  rep.attack = to_string(setting.attack.kind);
  if (setting.attack.kind == AttackKind::Threshold) rep.attack += ":" + attack::to_string(setting.attack.metric);
  std::vector<double> p, r, f, g;
  for (const auto& run : runs) {
    p.push_back(run.scores.precision);
    r.push_back(run.scores.recall);
    f.push_back(run.scores.f1);
    g.push_back(run.gap);
  }
  rep.precision = mean_std(p);
  rep.recall = mean_std(r);
  rep.f1 = mean_std(f);
  rep.gap = mean_std(g);
  rep.runs = std::move(runs);
  return rep;
}

AttackReport run_attack_experiment(const AttackSetting& setting, int repeats, std::uint64_t base_seed,
                                   RunOptions options) {
  if (repeats < 1) throw InvalidArgument("repeats must be >= 1");
  std::vector<RunResult> runs(static_cast<std::size_t>(repeats));
  parallel_for(runs.size(), options.threads, [&](std::size_t i) {
    runs[i] = run_attack_once(setting, base_seed + i).result;
  });
  return summarize(setting, std::move(runs));
}

namespace {

SweepSeries sweep(const AttackSetting& setting, const std::vector<int>& grid, int repeats,
                  std::uint64_t base_seed, RunOptions options, const std::string& axis,
                  const std::function<void(AttackSetting&, int)>& apply) {
  if (grid.empty()) throw InvalidArgument("sweep grid is empty");
  SweepSeries s;
  s.axis = axis;
  s.reports.resize(grid.size());
  std::vector<AttackSetting> points;
  for (int value : grid) {
    AttackSetting point = setting;
    apply(point, value);
    point.target.model.validate();
    point.target.train.validate();
    points.push_back(std::move(point));
  }
  // Parallelize over (point, repeat) pairs.
  const auto reps = static_cast<std::size_t>(repeats);
  if (repeats < 1) throw InvalidArgument("repeats must be >= 1");
  std::vector<RunResult> runs(grid.size() * reps);
  parallel_for(runs.size(), options.threads, [&](std::size_t i) {
    runs[i] = run_attack_once(points[i / reps], base_seed + i % reps).result;
  });
  for (std::size_t j = 0; j < grid.size(); ++j) {
    std::vector<RunResult> mine(runs.begin() + static_cast<std::ptrdiff_t>(j * reps),
                                runs.begin() + static_cast<std::ptrdiff_t>((j + 1) * reps));
    s.reports[j] = summarize(points[j], std::move(mine));
    s.x.push_back(grid[j]);
    s.gap.push_back(s.reports[j].gap.mean);
    s.f1.push_back(s.reports[j].f1.mean);
  }
  return s;
}

}  // namespace

SweepSeries epoch_sweep(const AttackSetting& setting, const std::vector<int>& epoch_grid, int repeats,
                        std::uint64_t base_seed, RunOptions options) {
  return sweep(setting, epoch_grid, repeats, base_seed, options, "epochs", [](AttackSetting& s, int e) {
    if (e < 0) throw InvalidArgument("epoch budget must be >= 0");
    s.target.train.epochs = e;
    s.shadow.train.epochs = e;
    s.name += "@epochs=" + std::to_string(e);
  });
}

SweepSeries depth_sweep(const AttackSetting& setting, const std::vector<int>& layer_grid, int repeats,
                        std::uint64_t base_seed, RunOptions options) {
  if (setting.target.model.arch != gnn::Arch::DeepGcnResidual) {
    throw InvalidArgument("depth sweep requires a DEEP-GCN-residual target");
  }
  return sweep(setting, layer_grid, repeats, base_seed, options, "layers", [](AttackSetting& s, int l) {
    if (l < 1) throw InvalidArgument("layer count must be >= 1");
    s.target.model.num_layers = l;
    if (s.shadow.model.arch == gnn::Arch::DeepGcnResidual) s.shadow.model.num_layers = l;
    s.name += "@layers=" + std::to_string(l);
  });
}

TransferGrid transfer_matrix(const std::vector<ModelSide>& shadows, const std::vector<ModelSide>& targets,
                             const AttackSpec& attack, int repeats, std::uint64_t base_seed,
                             RunOptions options) {
  if (shadows.empty() || targets.empty()) throw InvalidArgument("transfer grid needs shadow and target settings");
  if (repeats < 1) throw InvalidArgument("repeats must be >= 1");
  TransferGrid grid;
  std::vector<AttackSetting> settings;
  for (const auto& s : shadows) {
    check_side(s, "shadow");
    grid.shadow_labels.push_back(s.label);
  }
  for (const auto& t : targets) {
    check_side(t, "target");
    grid.target_labels.push_back(t.label);
  }
  for (const auto& s : shadows) {
    for (const auto& t : targets) {
      settings.push_back(AttackSetting{s.label + "->" + t.label, t, s, attack});
    }
  }
  const auto reps = static_cast<std::size_t>(repeats);
  std::vector<RunResult> runs(settings.size() * reps);
  parallel_for(runs.size(), options.threads, [&](std::size_t i) {
    runs[i] = run_attack_once(settings[i / reps], base_seed + i % reps).result;
  });
  grid.cells.assign(shadows.size(), {});
  for (std::size_t c = 0; c < settings.size(); ++c) {
    std::vector<RunResult> mine(runs.begin() + static_cast<std::ptrdiff_t>(c * reps),
                                runs.begin() + static_cast<std::ptrdiff_t>((c + 1) * reps));
    grid.cells[c / targets.size()].push_back(summarize(settings[c], std::move(mine)));
  }
  return grid;
}

CorrelationTable factor_correlations(const std::vector<FactorRow>& rows) {
  if (rows.size() < 3) throw InvalidArgument("factor correlations need at least 3 result rows");
  std::vector<double> f1;
  for (const auto& r : rows) f1.push_back(r.f1);
  const std::pair<const char*, double FactorRow::*> factors[] = {
      {"avg_nodes", &FactorRow::avg_nodes}, {"avg_edges", &FactorRow::avg_edges},
      {"density", &FactorRow::density},     {"class_count", &FactorRow::class_count},
      {"train_test_gap", &FactorRow::gap},
  };
  CorrelationTable table;
  for (const auto& [name, member] : factors) {
    std::vector<double> col;
    for (const auto& r : rows) col.push_back(r.*member);
    Correlation c;
    c.factor = name;
    try {
      c.rho = spearman(col, f1);
    } catch (const InvalidArgument& e) {
      c.error = e.what();
    }
    table.push_back(std::move(c));
  }
  return table;
}

FactorRow factor_row(const AttackReport& report, const Dataset& target_data) {
  const DatasetStats s = graph_stats(target_data);
  return FactorRow{s.avg_nodes, s.avg_edges, s.avg_density, static_cast<double>(s.class_count),
                   report.gap.mean, report.f1.mean};
}

}  // namespace gmia::eval
