#ifndef PETX_STATS_HPP
#define PETX_STATS_HPP

#include <span>
#include <vector>

// Small descriptive-statistics helpers shared by the threshold diagnostics,
// the posterior summaries, and the tests.

namespace petx {

double mean(std::span<const double> x);

// Sample standard deviation with the n-1 denominator; NaN for n < 2.
double sample_sd(std::span<const double> x);

// Empirical quantile by linear interpolation of order statistics
// (the h = (n-1)p + 1 convention). Input must be sorted ascending.
double quantile_sorted(std::span<const double> sorted, double p);

// Convenience: copies, sorts, and interpolates.
double quantile(std::vector<double> x, double p);

}  // namespace petx

#endif  // PETX_STATS_HPP
