#include "gmia/attack/threshold_attack.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

#include "gmia/error.hpp"
#include "gmia/io.hpp"

namespace gmia::attack {
namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

// Linear interpolation between order statistics.
double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

double f1_from_counts(std::size_t tp, std::size_t fp, std::size_t fn) {
  if (tp == 0) return 0.0;
  return 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
}

// Number of values on the member side of t.
std::size_t member_side_count(const std::vector<double>& sorted, double t, Orientation o) {
  if (o == Orientation::HigherIsMember) {
    return static_cast<std::size_t>(sorted.end() - std::lower_bound(sorted.begin(), sorted.end(), t));
  }
  return static_cast<std::size_t>(std::upper_bound(sorted.begin(), sorted.end(), t) - sorted.begin());
}

}  // namespace

std::string to_string(MetricKind kind) {
  switch (kind) {
    case MetricKind::HighestScore: return "HighestScore";
    case MetricKind::CrossEntropy: return "CrossEntropy";
    case MetricKind::MSE: return "MSE";
    case MetricKind::Cityblock: return "Cityblock";
    case MetricKind::Canberra: return "Canberra";
  }
  return "?";
}

MetricKind parse_metric(const std::string& name) {
  for (MetricKind k : kAllMetrics) {
    if (lower(to_string(k)) == lower(name)) return k;
  }
  throw InvalidArgument("unknown confidence metric '" + name + "'");
}

Orientation orientation(MetricKind kind) {
  return kind == MetricKind::HighestScore ? Orientation::HigherIsMember : Orientation::LowerIsMember;
}

double metric_value(MetricKind kind, const gnn::Posterior& p) {
  const Vector& x = p.probs;
  const int top = p.argmax();
  const double max_p = x[top];
  switch (kind) {
    case MetricKind::HighestScore:
      return max_p;
    case MetricKind::CrossEntropy:
      // -log(exp(max) / sum exp(x_j)) = log(sum exp(x_j - max)).
      return std::log((x.array() - max_p).exp().sum());
    case MetricKind::MSE: {
      double s = 0.0;
      for (int i = 0; i < x.size(); ++i) {
        const double d = x[i] - (i == top ? 1.0 : 0.0);
        s += d * d;
      }
      return std::sqrt(s);
    }
    case MetricKind::Cityblock: {
      double s = 0.0;
      for (int i = 0; i < x.size(); ++i) s += std::abs(x[i] - (i == top ? 1.0 : 0.0));
      return s;
    }
    case MetricKind::Canberra: {
      double s = 0.0;
      for (int i = 0; i < x.size(); ++i) {
        const double y = i == top ? 1.0 : 0.0;
        const double den = std::abs(x[i] + y);
        if (den > 0.0) s += std::abs(x[i] - y) / den;
      }
      return s;
    }
  }
  return 0.0;
}

std::string to_string(ThresholdObjective::Kind kind) {
  switch (kind) {
    case ThresholdObjective::Kind::MaxF1: return "max-f1";
    case ThresholdObjective::Kind::PrecisionQuantile: return "precision-quantile";
    case ThresholdObjective::Kind::RecallQuantile: return "recall-quantile";
  }
  return "?";
}

ThresholdObjective::Kind parse_objective(const std::string& name) {
  for (auto k : {ThresholdObjective::Kind::MaxF1, ThresholdObjective::Kind::PrecisionQuantile,
                 ThresholdObjective::Kind::RecallQuantile}) {
    if (to_string(k) == lower(name)) return k;
  }
  throw InvalidArgument("unknown threshold objective '" + name + "'");
}

bool ThresholdRule::is_member(double value) const {
  return orientation(metric) == Orientation::HigherIsMember ? value >= threshold : value <= threshold;
}

std::vector<double> threshold_candidates(std::span<const double> member,
                                         std::span<const double> non_member, Orientation o) {
  std::vector<double> pooled(member.begin(), member.end());
  pooled.insert(pooled.end(), non_member.begin(), non_member.end());
  std::sort(pooled.begin(), pooled.end());
  pooled.erase(std::unique(pooled.begin(), pooled.end()), pooled.end());
  std::vector<double> out;
  out.reserve(pooled.size() + 1);
  out.push_back(pooled.front() - 1.0);
  for (std::size_t i = 0; i + 1 < pooled.size(); ++i) {
    const double lo = pooled[i], hi = pooled[i + 1];
    double mid = 0.5 * (lo + hi);
    if (o == Orientation::HigherIsMember && mid <= lo) mid = hi;
    if (o == Orientation::LowerIsMember && mid >= hi) mid = lo;
    out.push_back(mid);
  }
  out.push_back(pooled.back() + 1.0);
  return out;
}

ThresholdRule select_threshold(std::span<const double> member, std::span<const double> non_member,
                               MetricKind metric, ThresholdObjective objective) {
  if (member.empty() || non_member.empty()) {
    throw InvalidArgument("threshold selection needs member and non-member values");
  }
  for (double v : member) if (!std::isfinite(v)) throw InvalidArgument("non-finite metric value");
  for (double v : non_member) if (!std::isfinite(v)) throw InvalidArgument("non-finite metric value");

  ThresholdRule rule;
  rule.metric = metric;
  rule.objective = objective;
  const Orientation o = orientation(metric);
  const std::vector<double> members(member.begin(), member.end());

  if (objective.kind != ThresholdObjective::Kind::MaxF1) {
    if (!(objective.q >= 0.0 && objective.q <= 1.0)) {
      throw InvalidArgument("quantile must lie in [0, 1]");
    }
    // Fraction of members to keep on the member side.
    const double keep = objective.kind == ThresholdObjective::Kind::RecallQuantile ? objective.q
                                                                                   : 1.0 - objective.q;
    rule.threshold = quantile(members, o == Orientation::HigherIsMember ? 1.0 - keep : keep);
    return rule;
  }

  std::vector<double> sorted_member = members;
  std::vector<double> sorted_non(non_member.begin(), non_member.end());
  std::sort(sorted_member.begin(), sorted_member.end());
  std::sort(sorted_non.begin(), sorted_non.end());

  // Candidates ascend; the stricter end is the top for higher-is-member and
  // the bottom for lower-is-member, so walk from the strict end and keep the
  // first best.
  std::vector<double> candidates = threshold_candidates(member, non_member, o);
  if (o == Orientation::HigherIsMember) std::reverse(candidates.begin(), candidates.end());
  double best_f1 = -1.0;
  for (double t : candidates) {
    const std::size_t tp = member_side_count(sorted_member, t, o);
    const std::size_t fp = member_side_count(sorted_non, t, o);
    const double f1 = f1_from_counts(tp, fp, members.size() - tp);
    if (f1 > best_f1) {
      best_f1 = f1;
      rule.threshold = t;
    }
  }
  return rule;
}

int threshold_attack(const ThresholdRule& rule, const gnn::TrainedModel& target, const Graph& g) {
  return rule.is_member(metric_value(rule.metric, gnn::forward(target, g))) ? 1 : 0;
}

std::string metric_distribution_csv(MetricKind metric, std::span<const MetricSample> samples) {
  std::ostringstream out;
  out << "metric,value,membership\n";
  const std::string name = to_string(metric);
  for (const auto& s : samples) out << name << ',' << io::format_double(s.value) << ',' << s.membership << '\n';
  return out.str();
}

}  // namespace gmia::attack
