#pragma once

#include <optional>
#include <span>
#include <vector>

namespace alphaloop::stats {

double mean(std::span<const double> xs);
/// Sample standard deviation (n - 1 denominator); 0 when n < 2.
double sample_std(std::span<const double> xs);

/// Pearson correlation; nullopt when n < 2 or either side has zero variance.
std::optional<double> pearson(std::span<const double> x, std::span<const double> y);

/// 1-based ranks with ties assigned their average rank.
std::vector<double> average_ranks(std::span<const double> xs);

std::optional<double> spearman(std::span<const double> x, std::span<const double> y);

/// Linear-interpolation quantile (R type 7) of a non-empty sample.
double quantile(std::vector<double> xs, double q);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
};

/// Ordinary least squares of y on x; nullopt when x has zero variance.
std::optional<LinearFit> ols(std::span<const double> x, std::span<const double> y);

}  // namespace alphaloop::stats
