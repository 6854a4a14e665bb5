#include "gmia/eval/report_io.hpp"

#include <sstream>

#include "gmia/io.hpp"

namespace gmia::eval {

using nlohmann::json;
using io::format_double;

namespace {

json mean_std_json(const MeanStd& m) { return {{"mean", m.mean}, {"std", m.std}}; }

// Quotes a CSV field when needed.
std::string field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

}  // namespace

json report_to_json(const AttackReport& r) {
  json runs = json::array();
  for (const auto& run : r.runs) {
    runs.push_back({{"seed", run.seed},
                    {"precision", run.scores.precision},
                    {"recall", run.scores.recall},
                    {"f1", run.scores.f1},
                    {"target_train_acc", run.target_train_acc},
                    {"target_test_acc", run.target_test_acc},
                    {"gap", run.gap},
                    {"k", run.k},
                    {"threshold", run.threshold ? json(*run.threshold) : json(nullptr)}});
  }
  return {{"setting",
           {{"name", r.setting},
            {"target", r.target_label},
            {"shadow", r.shadow_label},
            {"target_arch", r.target_arch},
            {"shadow_arch", r.shadow_arch},
            {"target_dataset", r.target_dataset},
            {"shadow_dataset", r.shadow_dataset},
            {"attack", r.attack}}},
          {"metrics",
           {{"precision", mean_std_json(r.precision)},
            {"recall", mean_std_json(r.recall)},
            {"f1", mean_std_json(r.f1)},
            {"train_test_gap", mean_std_json(r.gap)}}},
          {"repeats", r.runs.size()},
          {"runs", std::move(runs)}};
}

std::string runs_csv(const std::vector<AttackReport>& reports) {
  std::ostringstream out;
  out << kRunsCsvHeader << '\n';
  for (const auto& r : reports) {
    for (const auto& run : r.runs) {
      out << field(r.setting) << ',' << field(r.target_label) << ',' << field(r.shadow_label) << ','
          << r.target_arch << ',' << r.shadow_arch << ',' << field(r.target_dataset) << ','
          << field(r.shadow_dataset) << ',' << field(r.attack) << ',' << run.seed << ','
          << format_double(run.scores.precision) << ',' << format_double(run.scores.recall) << ','
          << format_double(run.scores.f1) << ',' << format_double(run.target_train_acc) << ','
          << format_double(run.target_test_acc) << ',' << format_double(run.gap) << ',' << run.k << ','
          << (run.threshold ? format_double(*run.threshold) : std::string()) << '\n';
    }
  }
  return out.str();
}

json series_to_json(const SweepSeries& s) {
  json reports = json::array();
  for (const auto& r : s.reports) reports.push_back(report_to_json(r));
  return {{"axis", s.axis}, {"x", s.x}, {"gap", s.gap}, {"f1", s.f1}, {"reports", std::move(reports)}};
}

std::string series_csv(const SweepSeries& s) {
  std::ostringstream out;
  out << s.axis << ",gap,f1,f1_std\n";
  for (std::size_t i = 0; i < s.x.size(); ++i) {
    out << format_double(s.x[i]) << ',' << format_double(s.gap[i]) << ',' << format_double(s.f1[i]) << ','
        << format_double(i < s.reports.size() ? s.reports[i].f1.std : 0.0) << '\n';
  }
  return out.str();
}

json grid_to_json(const TransferGrid& g) {
  json cells = json::array();
  for (const auto& row : g.cells) {
    json r = json::array();
    for (const auto& c : row) r.push_back(report_to_json(c));
    cells.push_back(std::move(r));
  }
  return {{"shadow_labels", g.shadow_labels}, {"target_labels", g.target_labels}, {"cells", std::move(cells)}};
}

std::string grid_csv(const TransferGrid& g) {
  std::ostringstream out;
  out << "shadow\\target";
  for (const auto& t : g.target_labels) out << ',' << field(t);
  out << '\n';
  for (std::size_t i = 0; i < g.cells.size(); ++i) {
    out << field(g.shadow_labels[i]);
    for (const auto& c : g.cells[i]) out << ',' << format_double(c.f1.mean);
    out << '\n';
  }
  return out.str();
}

json correlations_to_json(const CorrelationTable& t) {
  json out = json::object();
  for (const auto& c : t) {
    out[c.factor] = c.rho ? json{{"rho", *c.rho}} : json{{"error", c.error}};
  }
  return out;
}

std::string correlations_csv(const CorrelationTable& t) {
  std::ostringstream out;
  out << "factor,rho,error\n";
  for (const auto& c : t) {
    out << c.factor << ',' << (c.rho ? format_double(*c.rho) : std::string()) << ',' << field(c.error) << '\n';
  }
  return out.str();
}

json stats_to_json(const DatasetStats& s) {
  return {{"graph_count", s.graph_count}, {"class_count", s.class_count}, {"avg_nodes", s.avg_nodes},
          {"avg_edges", s.avg_edges},     {"avg_density", s.avg_density}, {"avg_degree", s.avg_degree}};
}

std::string stats_csv(const std::string& name, const DatasetStats& s) {
  std::ostringstream out;
  out << "dataset,graph_count,class_count,avg_nodes,avg_edges,avg_density,avg_degree\n"
      << field(name) << ',' << s.graph_count << ',' << s.class_count << ',' << format_double(s.avg_nodes) << ','
      << format_double(s.avg_edges) << ',' << format_double(s.avg_density) << ','
      << format_double(s.avg_degree) << '\n';
  return out.str();
}

}  // namespace gmia::eval
