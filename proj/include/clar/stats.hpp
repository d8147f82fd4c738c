#pragma once

#include <span>
#include <vector>

namespace clar::stats {

/// Linear-interpolation quantile (R type 7). Throws InvalidArgument on empty input.
double quantile(std::span<const double> xs, double q);
double median(std::span<const double> xs);
double iqr(std::span<const double> xs);

struct Correlation {
  double value = 0.0;
  bool degenerate = false;  ///< an input was constant; value is reported as 0
};

Correlation pearson(std::span<const double> x, std::span<const double> y);
/// Pearson correlation of average ranks.
Correlation spearman(std::span<const double> x, std::span<const double> y);

std::vector<double> average_ranks(std::span<const double> xs);

}  // namespace clar::stats
