#pragma once

#include <span>
#include <vector>

#include "gmia/gnn/model.hpp"

namespace gmia::eval {

struct AttackScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Binary scores with member (1) as the positive class. Zero denominators
/// give 0, and f1 is 0 when precision + recall is 0.
AttackScores attack_metrics(std::span<const int> predicted, std::span<const int> actual);

double train_test_gap(const gnn::TrainedModel& model, const Dataset& train, const Dataset& test);

/// Spearman rank correlation, average ranks for ties. Needs at least 3
/// points and throws InvalidArgument when either series is constant.
double spearman(std::span<const double> xs, std::span<const double> ys);

/// Average (1-based) ranks, ties sharing the mean of their positions.
std::vector<double> average_ranks(std::span<const double> v);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
};

MeanStd mean_std(std::span<const double> v);

}  // namespace gmia::eval
