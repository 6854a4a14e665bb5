#pragma once

#include <span>
#include <string>
#include <vector>

#include "gmia/gnn/model.hpp"

namespace gmia::attack {

enum class MetricKind { HighestScore, CrossEntropy, MSE, Cityblock, Canberra };
enum class Orientation { HigherIsMember, LowerIsMember };

std::string to_string(MetricKind kind);
MetricKind parse_metric(const std::string& name);
inline constexpr MetricKind kAllMetrics[] = {MetricKind::HighestScore, MetricKind::CrossEntropy,
                                             MetricKind::MSE, MetricKind::Cityblock,
                                             MetricKind::Canberra};

/// HighestScore is higher-is-member; the losses and distances are lower-is-member.
Orientation orientation(MetricKind kind);

/// Confidence value of a posterior. The reference label is the one-hot of
/// the predicted class (lowest index on ties); ground truth is never used.
///   HighestScore  max_i p_i
///   CrossEntropy  -log(exp(max_i p_i) / sum_j exp(p_j)), applied to p itself
///   MSE           sqrt(sum_i (p_i - y_i)^2)
///   Cityblock     sum_i |p_i - y_i|
///   Canberra      sum_i |p_i - y_i| / |p_i + y_i|, 0/0 terms are 0
double metric_value(MetricKind kind, const gnn::Posterior& p);

struct ThresholdObjective {
  enum class Kind { MaxF1, PrecisionQuantile, RecallQuantile } kind = Kind::MaxF1;
  /// For RecallQuantile(q) a fraction q of the reference members lands on
  /// the member side; PrecisionQuantile(q) keeps only a fraction 1 - q.
  double q = 0.5;
};

std::string to_string(ThresholdObjective::Kind kind);
ThresholdObjective::Kind parse_objective(const std::string& name);

struct ThresholdRule {
  MetricKind metric = MetricKind::HighestScore;
  double threshold = 0.0;
  ThresholdObjective objective;

  /// Boundary values count as members.
  bool is_member(double value) const;
};

/// Candidate thresholds for the max-F1 sweep: one below the smallest pooled
/// value, midpoints between consecutive distinct values, one above the largest.
/// When a midpoint rounds onto one of its neighbours (values one ulp apart) the
/// neighbour on the member side is used, so every candidate still separates.
std::vector<double> threshold_candidates(std::span<const double> member,
                                         std::span<const double> non_member, Orientation o);

/// Picks a threshold from reference member / non-member values. For MaxF1 the
/// best candidate wins, ties going to the stricter threshold.
ThresholdRule select_threshold(std::span<const double> member, std::span<const double> non_member,
                               MetricKind metric, ThresholdObjective objective = {});

int threshold_attack(const ThresholdRule& rule, const gnn::TrainedModel& target, const Graph& g);

struct MetricSample {
  double value = 0.0;
  int membership = 0;
};

/// CSV with header metric,value,membership.
std::string metric_distribution_csv(MetricKind metric, std::span<const MetricSample> samples);

}  // namespace gmia::attack
