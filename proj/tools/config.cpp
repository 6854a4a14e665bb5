#include "config.hpp"

#include <map>
#include <set>

#include <yaml-cpp/yaml.h>

#include "gmia/error.hpp"
#include "gmia/tu_format.hpp"

namespace gmia::cli {
namespace {

class Reader {
 public:
  explicit Reader(std::filesystem::path file) : file_(std::move(file)) {}

  [[noreturn]] void fail(const YAML::Node& at, const std::string& msg) const {
    const int line = at.Mark().line;
    throw ConfigError(file_.string() + ":" + (line >= 0 ? std::to_string(line + 1) + ":" : "") + " " + msg);
  }

  void require_map(const YAML::Node& node, const std::string& where) const {
    if (!node.IsMap()) fail(node, where + " must be a mapping");
  }

  void check_keys(const YAML::Node& node, const std::set<std::string>& allowed,
                  const std::string& where) const {
    require_map(node, where);
    for (const auto& kv : node) {
      const auto key = kv.first.as<std::string>();
      if (!allowed.count(key)) fail(kv.first, "unknown key '" + key + "' in " + where);
    }
  }

  template <class T>
  T get(const YAML::Node& map, const std::string& key, T fallback, const char* type) const {
    const YAML::Node n = map[key];
    if (!n) return fallback;
    try {
      return n.as<T>();
    } catch (const YAML::Exception&) {
      fail(n, "'" + key + "' must be " + type);
    }
  }

  std::filesystem::path resolve(const std::string& p) const {
    const std::filesystem::path path(p);
    return path.is_absolute() ? path : file_.parent_path() / path;
  }

  std::shared_ptr<const Dataset> dataset(const YAML::Node& node) {
    check_keys(node, {"synthetic", "tu"}, "dataset");
    if (node.size() != 1) fail(node, "dataset needs exactly one of 'synthetic' or 'tu'");
    const std::string key = YAML::Dump(node);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;

    std::shared_ptr<const Dataset> ds;
    if (const YAML::Node s = node["synthetic"]) {
      check_keys(s, {"num_graphs", "num_classes", "min_nodes", "max_nodes", "edge_probs", "feature_dim",
                     "class_shift", "seed", "name"},
                 "synthetic");
      SyntheticSpec spec;
      spec.num_graphs = get<std::size_t>(s, "num_graphs", spec.num_graphs, "a count");
      spec.num_classes = get<int>(s, "num_classes", spec.num_classes, "an integer");
      spec.min_nodes = get<int>(s, "min_nodes", spec.min_nodes, "an integer");
      spec.max_nodes = get<int>(s, "max_nodes", spec.max_nodes, "an integer");
      spec.edge_prob_per_class =
          get<std::vector<double>>(s, "edge_probs", spec.edge_prob_per_class, "a list of numbers");
      spec.feature_dim = get<int>(s, "feature_dim", spec.feature_dim, "an integer");
      spec.class_shift = get<double>(s, "class_shift", spec.class_shift, "a number");
      spec.seed = get<std::uint64_t>(s, "seed", spec.seed, "a non-negative integer");
      spec.name = get<std::string>(s, "name", spec.name, "a string");
      try {
        ds = std::make_shared<const Dataset>(gen_synthetic(spec));
      } catch (const InvalidArgument& e) {
        fail(s, e.what());
      }
    } else {
      const YAML::Node t = node["tu"];
      check_keys(t, {"dir", "name"}, "tu");
      if (!t["dir"]) fail(t, "tu dataset needs 'dir'");
      const auto dir = resolve(get<std::string>(t, "dir", "", "a string"));
      try {
        ds = load_tu(dir, get<std::string>(t, "name", "", "a string"));
      } catch (const ConfigError& e) {
        fail(t, e.what());
      }
    }
    cache_.emplace(key, ds);
    return ds;
  }

  eval::ModelSide side(const YAML::Node& node, eval::ModelSide base, const std::string& where) {
    check_keys(node, {"label", "dataset", "model", "train"}, where);
    if (node["dataset"]) base.data = dataset(node["dataset"]);
    if (const YAML::Node m = node["model"]) {
      check_keys(m, {"arch", "layers", "hidden", "gin_epsilon", "gin_learn_epsilon", "heads", "concat_heads",
                     "activation"},
                 where + ".model");
      auto& c = base.model;
      try {
        if (m["arch"]) c.arch = gnn::parse_arch(get<std::string>(m, "arch", "", "a string"));
        if (m["activation"]) {
          c.activation = gnn::parse_activation(get<std::string>(m, "activation", "", "a string"));
        }
      } catch (const InvalidArgument& e) {
        fail(m, e.what());
      }
      c.num_layers = get<int>(m, "layers", c.num_layers, "an integer");
      c.hidden_dim = get<int>(m, "hidden", c.hidden_dim, "an integer");
      c.gin_epsilon = get<double>(m, "gin_epsilon", c.gin_epsilon, "a number");
      c.gin_learn_epsilon = get<bool>(m, "gin_learn_epsilon", c.gin_learn_epsilon, "a boolean");
      c.attention_heads = get<int>(m, "heads", c.attention_heads, "an integer");
      c.concat_heads = get<bool>(m, "concat_heads", c.concat_heads, "a boolean");
      try {
        c.validate();
      } catch (const InvalidArgument& e) {
        fail(m, e.what());
      }
    }
    if (const YAML::Node t = node["train"]) {
      check_keys(t, {"epochs", "learning_rate"}, where + ".train");
      base.train.epochs = get<int>(t, "epochs", base.train.epochs, "an integer");
      base.train.learning_rate = get<double>(t, "learning_rate", base.train.learning_rate, "a number");
      try {
        base.train.validate();
      } catch (const InvalidArgument& e) {
        fail(t, e.what());
      }
    }
    base.label = get<std::string>(node, "label", gnn::to_string(base.model.arch), "a string");
    return base;
  }

  eval::AttackSpec attack(const YAML::Node& a) const {
    check_keys(a, {"kind", "k", "hidden", "epochs", "learning_rate", "decision_threshold", "metric", "objective",
                   "quantile"},
               "attack");
    eval::AttackSpec spec;
    try {
      if (a["kind"]) spec.kind = eval::parse_attack_kind(get<std::string>(a, "kind", "", "a string"));
      if (a["metric"]) spec.metric = attack::parse_metric(get<std::string>(a, "metric", "", "a string"));
      if (a["objective"]) {
        spec.objective.kind = attack::parse_objective(get<std::string>(a, "objective", "", "a string"));
      }
    } catch (const InvalidArgument& e) {
      fail(a, e.what());
    }
    spec.objective.q = get<double>(a, "quantile", spec.objective.q, "a number");
    if (!(spec.objective.q >= 0.0 && spec.objective.q <= 1.0)) fail(a["quantile"], "quantile must lie in [0, 1]");
    auto& m = spec.model;
    m.k = get<int>(a, "k", m.k, "an integer");
    m.hidden_dim = get<int>(a, "hidden", m.hidden_dim, "an integer");
    m.epochs = get<int>(a, "epochs", m.epochs, "an integer");
    m.learning_rate = get<double>(a, "learning_rate", m.learning_rate, "a number");
    m.decision_threshold = get<double>(a, "decision_threshold", m.decision_threshold, "a number");
    try {
      m.validate();
    } catch (const InvalidArgument& e) {
      fail(a, e.what());
    }
    return spec;
  }

  std::vector<eval::ModelSide> side_list(const YAML::Node& parent, const std::string& where,
                                         const eval::ModelSide& base) {
    const YAML::Node list = parent[where];
    if (!list) fail(parent, "transfer needs '" + where + "'");
    if (!list.IsSequence()) fail(list, where + " must be a list");
    if (list.size() == 0) fail(list, where + " must not be empty");
    std::vector<eval::ModelSide> out;
    std::set<std::string> labels;
    for (std::size_t i = 0; i < list.size(); ++i) {
      out.push_back(side(list[i], base, where + "[" + std::to_string(i) + "]"));
      if (!labels.insert(out.back().label).second) {
        fail(list[i], "duplicate label '" + out.back().label + "' in " + where + "; set 'label'");
      }
    }
    return out;
  }

  SweepConfig sweep(const YAML::Node& s) const {
    check_keys(s, {"axis", "grid"}, "sweep");
    SweepConfig out;
    out.axis = get<std::string>(s, "axis", out.axis, "a string");
    out.grid = get<std::vector<int>>(s, "grid", {}, "a list of integers");
    return out;
  }

 private:
  std::filesystem::path file_;
  std::map<std::string, std::shared_ptr<const Dataset>> cache_;
};

}  // namespace

std::shared_ptr<const Dataset> load_tu(const std::filesystem::path& dir, const std::string& name) {
  if (!std::filesystem::is_directory(dir)) throw ConfigError("dataset directory not found: " + dir.string());
  std::string n = name;
  if (n.empty()) n = std::filesystem::absolute(dir).lexically_normal().filename().string();
  if (n.empty()) n = std::filesystem::absolute(dir).lexically_normal().parent_path().filename().string();
  try {
    return std::make_shared<const Dataset>(parse_tu_dataset(dir, n));
  } catch (const ParseError& e) {
    throw ConfigError(e.what());
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
}

void validate_sweep(const ExperimentConfig& cfg, const SweepConfig& sweep) {
  if (sweep.axis != "epochs" && sweep.axis != "layers") {
    throw ConfigError("sweep axis must be 'epochs' or 'layers', got '" + sweep.axis + "'");
  }
  if (sweep.axis == "layers" && cfg.setting.target.model.arch != gnn::Arch::DeepGcnResidual) {
    throw ConfigError("the layers axis needs target arch DEEP-GCN-residual, got " +
                      gnn::to_string(cfg.setting.target.model.arch));
  }
  if (sweep.grid.empty()) throw ConfigError("sweep grid must not be empty");
  for (int v : sweep.grid) {
    if (sweep.axis == "epochs" && v < 0) throw ConfigError("epoch grid values must be >= 0");
    if (sweep.axis == "layers" && v < 1) throw ConfigError("layer grid values must be >= 1");
  }
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  YAML::Node root;
  try {
    root = YAML::LoadFile(path.string());
  } catch (const YAML::BadFile&) {
    throw ConfigError("cannot read config file " + path.string());
  } catch (const YAML::ParserException& e) {
    throw ConfigError(path.string() + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  Reader r(path);
  r.check_keys(root, {"name", "seed", "repeats", "threads", "output", "dataset", "shadow_dataset", "target",
                      "shadow", "attack", "sweep", "transfer"},
               "config");

  ExperimentConfig cfg;
  cfg.name = r.get<std::string>(root, "name", cfg.name, "a string");
  if (cfg.name.empty() || cfg.name.find_first_of("/\\") != std::string::npos || cfg.name == "." ||
      cfg.name == "..") {
    r.fail(root["name"], "name must be a non-empty plain directory name");
  }
  cfg.seed = r.get<std::uint64_t>(root, "seed", cfg.seed, "a non-negative integer");
  cfg.repeats = r.get<int>(root, "repeats", cfg.repeats, "an integer");
  if (cfg.repeats < 1) r.fail(root["repeats"], "repeats must be >= 1");
  cfg.threads = r.get<unsigned>(root, "threads", cfg.threads, "a non-negative integer");
  if (root["output"]) cfg.output = r.resolve(r.get<std::string>(root, "output", "", "a string"));

  if (!root["dataset"]) r.fail(root, "config needs a 'dataset' section");
  eval::ModelSide target;
  target.data = r.dataset(root["dataset"]);
  target = root["target"] ? r.side(root["target"], target, "target") : target;
  if (!root["target"]) target.label = gnn::to_string(target.model.arch);

  eval::ModelSide shadow = target;
  if (root["shadow_dataset"]) shadow.data = r.dataset(root["shadow_dataset"]);
  if (root["shadow"]) shadow = r.side(root["shadow"], shadow, "shadow");

  cfg.setting.name = cfg.name;
  cfg.setting.target = target;
  cfg.setting.shadow = shadow;
  if (root["attack"]) cfg.setting.attack = r.attack(root["attack"]);

  if (root["sweep"]) {
    cfg.sweep = r.sweep(root["sweep"]);
    try {
      validate_sweep(cfg, *cfg.sweep);
    } catch (const ConfigError& e) {
      r.fail(root["sweep"], e.what());
    }
  }
  if (const YAML::Node t = root["transfer"]) {
    r.check_keys(t, {"shadows", "targets"}, "transfer");
    TransferConfig tc;
    tc.shadows = r.side_list(t, "shadows", target);
    tc.targets = r.side_list(t, "targets", target);
    cfg.transfer = std::move(tc);
  }
  return cfg;
}

}  // namespace gmia::cli
