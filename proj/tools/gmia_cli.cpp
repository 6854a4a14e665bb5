// gmia: train graph classifiers and run membership-inference experiments
// against them from a YAML config.

#include <chrono>
#include <cstdio>
#include <ctime>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "config.hpp"
#include "gmia/error.hpp"
#include "gmia/eval/report_io.hpp"
#include "gmia/gnn/checkpoint.hpp"
#include "gmia/io.hpp"
#include "gmia/random.hpp"

namespace fs = std::filesystem;
using namespace gmia;
using gmia::cli::ConfigError;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;

struct GlobalFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> repeats;
  std::optional<unsigned> threads;
};

cli::ExperimentConfig load(const GlobalFlags& g) {
  if (g.config.empty()) throw ConfigError("--config is required for this command");
  cli::ExperimentConfig cfg = cli::load_config(g.config);
  if (g.seed) cfg.seed = *g.seed;
  if (g.out) cfg.output = *g.out;
  if (g.repeats) {
    if (*g.repeats < 1) throw ConfigError("--repeats must be >= 1");
    cfg.repeats = *g.repeats;
  }
  if (g.threads) cfg.threads = *g.threads;
  return cfg;
}

fs::path experiment_dir(const cli::ExperimentConfig& cfg) { return cfg.output / cfg.name; }

void write(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  io::atomic_write(path, content);
  std::cerr << "wrote " << path.string() << "\n";
}

// The only file that carries a wall-clock time.
void write_metadata(const fs::path& dir, const std::string& command, const cli::ExperimentConfig& cfg,
                    const std::string& config_path) {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  nlohmann::json j;
  j["command"] = command;
  j["config"] = config_path;
  j["seed"] = cfg.seed;
  j["repeats"] = cfg.repeats;
  j["created_at"] = stamp;
  write(dir / "metadata.json", j.dump(2) + "\n");
}

eval::RunOptions run_options(const cli::ExperimentConfig& cfg) { return {cfg.threads}; }

int cmd_train(const GlobalFlags& g) {
  const auto cfg = load(g);
  const auto& side = cfg.setting.target;
  const auto [train_part, test_part] = split_dataset(*side.data, {0.5, derive_seed(cfg.seed, 1)});
  gnn::TrainConfig tc = side.train;
  tc.seed = derive_seed(cfg.seed, 2);
  std::cerr << "training " << side.label << " on " << train_part.size() << " graphs for " << tc.epochs
            << " epochs\n";
  const auto model = gnn::train(side.model, tc, train_part, &test_part);

  const fs::path dir = experiment_dir(cfg);
  write(dir / "checkpoints" / "target.json", gnn::checkpoint_to_json(model).dump(1) + "\n");
  std::ostringstream csv;
  csv << "epoch,train_loss,train_acc,test_acc\n";
  for (const auto& r : model.history) {
    csv << r.epoch << ',' << io::format_double(r.train_loss) << ',' << io::format_double(r.train_acc) << ','
        << (r.test_acc ? io::format_double(*r.test_acc) : "") << '\n';
  }
  write(dir / "series" / "target_history.csv", csv.str());
  write_metadata(dir, "train", cfg, g.config);
  std::cout << "train_acc " << io::format_double(gnn::evaluate_accuracy(model, train_part)) << "\n"
            << "test_acc " << io::format_double(gnn::evaluate_accuracy(model, test_part)) << "\n";
  return 0;
}

int cmd_attack(const GlobalFlags& g) {
  const auto cfg = load(g);
  const auto report = eval::run_attack_experiment(cfg.setting, cfg.repeats, cfg.seed, run_options(cfg));
  const fs::path dir = experiment_dir(cfg);
  write(dir / "reports" / "attack.json", eval::report_to_json(report).dump(2) + "\n");
  write(dir / "reports" / "runs.csv", eval::runs_csv({report}));
  if (cfg.setting.attack.kind == eval::AttackKind::Threshold) {
    const auto first = eval::run_attack_once(cfg.setting, cfg.seed);
    write(dir / "reports" / "metric_distribution.csv",
          attack::metric_distribution_csv(cfg.setting.attack.metric, first.reference_samples));
  }
  write_metadata(dir, "attack", cfg, g.config);
  std::printf("f1 %.4f +- %.4f  precision %.4f  recall %.4f  gap %.4f  (%d runs)\n", report.f1.mean,
              report.f1.std, report.precision.mean, report.recall.mean, report.gap.mean, cfg.repeats);
  return 0;
}

int cmd_sweep(const GlobalFlags& g, const std::optional<std::string>& axis,
              const std::optional<std::vector<int>>& grid) {
  const auto cfg = load(g);
  cli::SweepConfig sweep = cfg.sweep.value_or(cli::SweepConfig{});
  if (axis) sweep.axis = *axis;
  if (grid) sweep.grid = *grid;
  cli::validate_sweep(cfg, sweep);

  const auto series = sweep.axis == "epochs"
                          ? eval::epoch_sweep(cfg.setting, sweep.grid, cfg.repeats, cfg.seed, run_options(cfg))
                          : eval::depth_sweep(cfg.setting, sweep.grid, cfg.repeats, cfg.seed, run_options(cfg));
  const fs::path dir = experiment_dir(cfg);
  write(dir / "series" / ("sweep_" + sweep.axis + ".csv"), eval::series_csv(series));
  write(dir / "series" / ("sweep_" + sweep.axis + ".json"), eval::series_to_json(series).dump(2) + "\n");
  write(dir / "reports" / ("sweep_" + sweep.axis + "_runs.csv"), eval::runs_csv(series.reports));
  write_metadata(dir, "sweep", cfg, g.config);
  for (std::size_t i = 0; i < series.x.size(); ++i) {
    std::printf("%s %g  gap %.4f  f1 %.4f\n", sweep.axis.c_str(), series.x[i], series.gap[i], series.f1[i]);
  }
  return 0;
}

int cmd_transfer(const GlobalFlags& g) {
  const auto cfg = load(g);
  if (!cfg.transfer) throw ConfigError(g.config + ": transfer needs a 'transfer' section");
  const auto grid = eval::transfer_matrix(cfg.transfer->shadows, cfg.transfer->targets, cfg.setting.attack,
                                          cfg.repeats, cfg.seed, run_options(cfg));
  const fs::path dir = experiment_dir(cfg);
  write(dir / "reports" / "transfer_grid.csv", eval::grid_csv(grid));
  write(dir / "reports" / "transfer.json", eval::grid_to_json(grid).dump(2) + "\n");
  std::vector<eval::AttackReport> all;
  for (const auto& row : grid.cells) all.insert(all.end(), row.begin(), row.end());
  write(dir / "reports" / "transfer_runs.csv", eval::runs_csv(all));
  write_metadata(dir, "transfer", cfg, g.config);
  std::cout << eval::grid_csv(grid);
  return 0;
}

int cmd_stats(const GlobalFlags& g, const std::string& path, const std::string& name) {
  std::shared_ptr<const Dataset> ds;
  fs::path out = g.out.value_or("runs");
  if (!path.empty()) {
    ds = cli::load_tu(path, name);
  } else if (!g.config.empty()) {
    const auto cfg = load(g);
    ds = cfg.setting.target.data;
    out = cfg.output;
  } else {
    throw ConfigError("stats needs a dataset directory or --config");
  }
  const DatasetStats s = graph_stats(*ds);
  std::printf("dataset      %s\ngraphs       %zu\nclasses      %d\navg_nodes    %.4f\navg_edges    %.4f\n"
              "avg_density  %.4f\navg_degree   %.4f\n",
              ds->name().c_str(), s.graph_count, s.class_count, s.avg_nodes, s.avg_edges, s.avg_density,
              s.avg_degree);
  write(out / ds->name() / "reports" / "stats.csv", eval::stats_csv(ds->name(), s));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Membership-inference experiments on graph classifiers"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalFlags g;
  app.add_option("--config", g.config, "YAML experiment config");
  app.add_option("--seed", g.seed, "Base seed (overrides the config)");
  app.add_option("--out", g.out, "Output root (overrides the config)");
  app.add_option("--repeats", g.repeats, "Repeated runs (overrides the config)");
  app.add_option("--threads", g.threads, "Worker threads, 0 = all cores");

  auto* train = app.add_subcommand("train", "Train the target model, write a checkpoint and its history");
  auto* attack = app.add_subcommand("attack", "Run the configured attack and write reports");
  auto* sweep = app.add_subcommand("sweep", "Sweep training epochs or network depth");
  std::optional<std::string> axis;
  std::optional<std::vector<int>> grid;
  sweep->add_option("--axis", axis, "epochs or layers");
  sweep->add_option("--grid", grid, "Grid values")->delimiter(',');
  auto* transfer = app.add_subcommand("transfer", "Shadow x target transfer grid");
  auto* stats = app.add_subcommand("stats", "Summary statistics of a TU dataset directory");
  std::string stats_path, stats_name;
  stats->add_option("path", stats_path, "Dataset directory");
  stats->add_option("--name", stats_name, "File prefix (defaults to the directory name)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*train) return cmd_train(g);
    if (*attack) return cmd_attack(g);
    if (*sweep) return cmd_sweep(g, axis, grid);
    if (*transfer) return cmd_transfer(g);
    if (*stats) return cmd_stats(g, stats_path, stats_name);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitRuntime;
}
