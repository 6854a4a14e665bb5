#include "gmia/tu_format.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string_view>

#include "gmia/error.hpp"

namespace fs = std::filesystem;

namespace gmia {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

struct LineFile {
  std::string path;
  std::vector<std::string> lines;  // non-blank lines
  std::vector<std::size_t> numbers;  // 1-based line numbers of `lines`
};

LineFile read_lines(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw ParseError("missing or unreadable file: " + p.string());
  LineFile f;
  f.path = p.filename().string();
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (trim(line).empty()) continue;
    f.lines.push_back(line);
    f.numbers.push_back(number);
  }
  return f;
}

long long parse_int(std::string_view tok, const LineFile& f, std::size_t i) {
  long long v = 0;
  const auto* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, v);
  if (ec != std::errc() || ptr != end || tok.empty()) {
    throw ParseError(f.path, f.numbers[i], "expected integer, got '" + std::string(tok) + "'");
  }
  return v;
}

double parse_real(std::string_view tok, const LineFile& f, std::size_t i) {
  // std::from_chars for double is not available on every toolchain we build on.
  std::string s(tok);
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw ParseError(f.path, f.numbers[i], "expected real, got '" + s + "'");
  }
  return v;
}

std::vector<long long> read_int_column(const LineFile& f) {
  std::vector<long long> out;
  out.reserve(f.lines.size());
  for (std::size_t i = 0; i < f.lines.size(); ++i) out.push_back(parse_int(trim(f.lines[i]), f, i));
  return out;
}

}  // namespace

Dataset parse_tu_dataset(const fs::path& directory, const std::string& name) {
  const auto file = [&](const char* suffix) { return directory / (name + suffix); };
  for (const char* required : {"_A.txt", "_graph_indicator.txt", "_graph_labels.txt"}) {
    if (!fs::exists(file(required))) {
      throw ParseError("missing mandatory file: " + file(required).string());
    }
  }

  const LineFile indicator_file = read_lines(file("_graph_indicator.txt"));
  const std::vector<long long> indicator = read_int_column(indicator_file);
  const LineFile graph_label_file = read_lines(file("_graph_labels.txt"));
  const std::vector<long long> raw_labels = read_int_column(graph_label_file);

  const std::size_t num_nodes = indicator.size();
  const std::size_t num_graphs = raw_labels.size();
  if (num_nodes == 0) throw ParseError(indicator_file.path + ": no nodes");
  if (num_graphs == 0) throw ParseError(graph_label_file.path + ": no graph labels");

  // Global node id -> (graph, local id). Nodes of one graph need not be contiguous.
  std::vector<std::size_t> local_id(num_nodes);
  std::vector<std::size_t> graph_size(num_graphs, 0);
  for (std::size_t i = 0; i < num_nodes; ++i) {
    const long long gid = indicator[i];
    if (gid < 1 || static_cast<std::size_t>(gid) > num_graphs) {
      throw ParseError(indicator_file.path, indicator_file.numbers[i],
                       "graph id " + std::to_string(gid) + " out of range [1, " +
                           std::to_string(num_graphs) + "]");
    }
    local_id[i] = graph_size[static_cast<std::size_t>(gid - 1)]++;
  }
  for (std::size_t g = 0; g < num_graphs; ++g) {
    if (graph_size[g] == 0) {
      throw ParseError(indicator_file.path + ": graph " + std::to_string(g + 1) + " has no nodes");
    }
  }

  // Features: one-hot node labels, then attributes.
  std::optional<std::vector<long long>> node_labels;
  std::map<long long, int> node_label_index;
  if (fs::exists(file("_node_labels.txt"))) {
    const LineFile f = read_lines(file("_node_labels.txt"));
    node_labels = read_int_column(f);
    if (node_labels->size() != num_nodes) {
      throw ParseError(f.path + ": " + std::to_string(node_labels->size()) +
                       " node labels for " + std::to_string(num_nodes) + " nodes");
    }
    for (long long l : *node_labels) node_label_index.emplace(l, 0);
    int next = 0;
    for (auto& [l, idx] : node_label_index) idx = next++;
  }
  std::vector<std::vector<double>> attributes;
  if (fs::exists(file("_node_attributes.txt"))) {
    const LineFile f = read_lines(file("_node_attributes.txt"));
    if (f.lines.size() != num_nodes) {
      throw ParseError(f.path + ": " + std::to_string(f.lines.size()) +
                       " attribute rows for " + std::to_string(num_nodes) + " nodes");
    }
    attributes.reserve(num_nodes);
    for (std::size_t i = 0; i < f.lines.size(); ++i) {
      std::vector<double> row;
      for (auto tok : split_commas(f.lines[i])) row.push_back(parse_real(tok, f, i));
      if (!attributes.empty() && row.size() != attributes.front().size()) {
        throw ParseError(f.path, f.numbers[i],
                         "expected " + std::to_string(attributes.front().size()) +
                             " attributes, got " + std::to_string(row.size()));
      }
      attributes.push_back(std::move(row));
    }
  }

  const int label_dim = static_cast<int>(node_label_index.size());
  const int attr_dim = attributes.empty() ? 0 : static_cast<int>(attributes.front().size());
  const bool constant = label_dim == 0 && attr_dim == 0;
  const int feature_dim = constant ? 1 : label_dim + attr_dim;

  std::vector<Matrix> features(num_graphs);
  for (std::size_t g = 0; g < num_graphs; ++g) {
    features[g] = Matrix::Zero(static_cast<Eigen::Index>(graph_size[g]), feature_dim);
  }
  for (std::size_t i = 0; i < num_nodes; ++i) {
    Matrix& x = features[static_cast<std::size_t>(indicator[i] - 1)];
    const auto row = static_cast<Eigen::Index>(local_id[i]);
    if (constant) {
      x(row, 0) = 1.0;
      continue;
    }
    if (node_labels) x(row, node_label_index.at((*node_labels)[i])) = 1.0;
    for (int c = 0; c < attr_dim; ++c) x(row, label_dim + c) = attributes[i][static_cast<std::size_t>(c)];
  }

  std::vector<std::vector<Edge>> edges(num_graphs);
  const LineFile a_file = read_lines(file("_A.txt"));
  for (std::size_t i = 0; i < a_file.lines.size(); ++i) {
    const auto toks = split_commas(a_file.lines[i]);
    if (toks.size() != 2) {
      throw ParseError(a_file.path, a_file.numbers[i], "expected 'u, v' edge pair");
    }
    const long long u = parse_int(toks[0], a_file, i);
    const long long v = parse_int(toks[1], a_file, i);
    for (long long id : {u, v}) {
      if (id < 1 || static_cast<std::size_t>(id) > num_nodes) {
        throw ParseError(a_file.path, a_file.numbers[i],
                         "node id " + std::to_string(id) + " out of range [1, " +
                             std::to_string(num_nodes) + "]");
      }
    }
    const auto ui = static_cast<std::size_t>(u - 1);
    const auto vi = static_cast<std::size_t>(v - 1);
    if (indicator[ui] != indicator[vi]) {
      throw ParseError(a_file.path, a_file.numbers[i], "edge crosses graphs");
    }
    if (ui == vi) continue;  // self-loops come from normalization, not the data
    edges[static_cast<std::size_t>(indicator[ui] - 1)].emplace_back(
        static_cast<int>(local_id[ui]), static_cast<int>(local_id[vi]));
  }

  std::map<long long, int> label_index;
  for (long long l : raw_labels) label_index.emplace(l, 0);
  int next = 0;
  for (auto& [l, idx] : label_index) idx = next++;

  std::vector<Graph> graphs;
  graphs.reserve(num_graphs);
  for (std::size_t g = 0; g < num_graphs; ++g) {
    graphs.emplace_back(std::move(features[g]), std::move(edges[g]), label_index.at(raw_labels[g]));
  }
  return Dataset(name, std::move(graphs), static_cast<int>(label_index.size()));
}

void write_tu_dataset(const Dataset& ds, const fs::path& directory, const std::string& name) {
  fs::create_directories(directory);
  const auto open = [&](const char* suffix) {
    std::ofstream out(directory / (name + suffix));
    if (!out) throw std::runtime_error("cannot write " + (directory / (name + suffix)).string());
    return out;
  };
  auto a = open("_A.txt");
  auto indicator = open("_graph_indicator.txt");
  auto labels = open("_graph_labels.txt");
  auto attrs = open("_node_attributes.txt");

  char buf[64];
  std::size_t offset = 0;
  for (std::size_t g = 0; g < ds.size(); ++g) {
    const Graph& graph = ds[g];
    labels << graph.label() << '\n';
    for (int i = 0; i < graph.num_nodes(); ++i) {
      indicator << g + 1 << '\n';
      for (int c = 0; c < graph.feature_dim(); ++c) {
        std::snprintf(buf, sizeof buf, "%.17g", graph.features()(i, c));
        attrs << (c ? ", " : "") << buf;
      }
      attrs << '\n';
    }
    for (const auto& [u, v] : graph.edges()) {
      a << offset + static_cast<std::size_t>(u) + 1 << ", " << offset + static_cast<std::size_t>(v) + 1 << '\n';
      a << offset + static_cast<std::size_t>(v) + 1 << ", " << offset + static_cast<std::size_t>(u) + 1 << '\n';
    }
    offset += static_cast<std::size_t>(graph.num_nodes());
  }
}

}  // namespace gmia
