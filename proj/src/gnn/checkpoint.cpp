#include "gmia/gnn/checkpoint.hpp"

#include "gmia/error.hpp"
#include "gmia/io.hpp"

namespace gmia::gnn {

using nlohmann::json;

json config_to_json(const ModelConfig& c) {
  return {{"arch", to_string(c.arch)},
          {"num_layers", c.num_layers},
          {"hidden_dim", c.hidden_dim},
          {"gin_epsilon", c.gin_epsilon},
          {"gin_learn_epsilon", c.gin_learn_epsilon},
          {"attention_heads", c.attention_heads},
          {"concat_heads", c.concat_heads},
          {"activation", to_string(c.activation)}};
}

ModelConfig config_from_json(const json& j) {
  ModelConfig c;
  for (const auto& [key, value] : j.items()) {
    if (key == "arch") c.arch = parse_arch(value.get<std::string>());
    else if (key == "num_layers") c.num_layers = value.get<int>();
    else if (key == "hidden_dim") c.hidden_dim = value.get<int>();
    else if (key == "gin_epsilon") c.gin_epsilon = value.get<double>();
    else if (key == "gin_learn_epsilon") c.gin_learn_epsilon = value.get<bool>();
    else if (key == "attention_heads") c.attention_heads = value.get<int>();
    else if (key == "concat_heads") c.concat_heads = value.get<bool>();
    else if (key == "activation") c.activation = parse_activation(value.get<std::string>());
    else throw ParseError("unknown model config key '" + key + "'");
  }
  c.validate();
  return c;
}

json checkpoint_to_json(const TrainedModel& model) {
  const auto layout = param_layout(model.config, model.feature_dim, model.num_classes);
  json tensors = json::array();
  for (std::size_t i = 0; i < model.weights.size(); ++i) {
    json t = io::matrix_to_json(model.weights[i]);
    t["name"] = layout.at(i).name;
    tensors.push_back(std::move(t));
  }
  json history = json::array();
  for (const EpochRecord& r : model.history) {
    history.push_back({{"epoch", r.epoch},
                       {"train_loss", r.train_loss},
                       {"train_acc", r.train_acc},
                       {"test_acc", r.test_acc ? json(*r.test_acc) : json(nullptr)}});
  }
  return {{"format", "gmia.model"},
          {"version", kCheckpointVersion},
          {"config", config_to_json(model.config)},
          {"feature_dim", model.feature_dim},
          {"num_classes", model.num_classes},
          {"weights", std::move(tensors)},
          {"history", std::move(history)}};
}

TrainedModel checkpoint_from_json(const json& j) {
  if (j.value("format", "") != "gmia.model") throw ParseError("not a gmia model checkpoint");
  if (j.at("version").get<int>() != kCheckpointVersion) {
    throw ParseError("unsupported checkpoint version " + j.at("version").dump());
  }
  TrainedModel m;
  m.config = config_from_json(j.at("config"));
  m.feature_dim = j.at("feature_dim").get<int>();
  m.num_classes = j.at("num_classes").get<int>();
  const auto layout = param_layout(m.config, m.feature_dim, m.num_classes);
  const auto& tensors = j.at("weights");
  if (tensors.size() != layout.size()) {
    throw ParseError("checkpoint has " + std::to_string(tensors.size()) + " tensors, expected " +
                     std::to_string(layout.size()));
  }
  for (std::size_t i = 0; i < layout.size(); ++i) {
    Matrix t = io::matrix_from_json(tensors[i]);
    if (t.rows() != layout[i].rows || t.cols() != layout[i].cols) {
      throw ParseError("tensor " + layout[i].name + " has the wrong shape");
    }
    m.weights.push_back(std::move(t));
  }
  for (const auto& r : j.at("history")) {
    EpochRecord rec;
    rec.epoch = r.at("epoch").get<int>();
    rec.train_loss = r.at("train_loss").get<double>();
    rec.train_acc = r.at("train_acc").get<double>();
    if (!r.at("test_acc").is_null()) rec.test_acc = r.at("test_acc").get<double>();
    m.history.push_back(rec);
  }
  return m;
}

void save_checkpoint(const TrainedModel& model, const std::filesystem::path& path) {
  io::atomic_write(path, checkpoint_to_json(model).dump(1) + "\n");
}

TrainedModel load_checkpoint(const std::filesystem::path& path) {
  return checkpoint_from_json(json::parse(io::read_file(path)));
}

}  // namespace gmia::gnn
