#pragma once

#include <vector>

namespace spca {

/// Differential entropy in bits from an equal-width histogram over the
/// observed range. Returns -inf for constant input.
double histogram_entropy(const std::vector<double>& values, int bins = 64);

/// Kolmogorov-Smirnov statistic against the uniform on [min, max] of the values.
double ks_uniform(std::vector<double> values);

/// Excess kurtosis (0 for a Gaussian).
double excess_kurtosis(const std::vector<double>& values);

double mean(const std::vector<double>& values);
double variance(const std::vector<double>& values);
double median(std::vector<double> values);

/// Least-squares slope of y on x.
double ols_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace spca
