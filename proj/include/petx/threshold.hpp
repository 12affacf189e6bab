#ifndef PETX_THRESHOLD_HPP
#define PETX_THRESHOLD_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

// Threshold diagnostics and declustering: mean-residual-life curves for
// threshold choice, exceedance extraction, runs declustering, and the runs
// estimator of the extremal index.

namespace petx {

// One point of a mean-residual-life curve. mean_excess and ci_halfwidth are
// NaN when there are too few exceedances to define them (none, or fewer than
// two for the halfwidth).
struct MrlPoint {
  double threshold;
  double mean_excess;
  std::size_t n_excess;
  double ci_halfwidth;  // normal-approximation 95% band: 1.96 * sd / sqrt(n)
};

// A maximal run of exceedances not interrupted by run_length consecutive
// sub-threshold observations (or by a series break). Indices refer to the
// original series; start and end are the first and last exceedance of the
// cluster, peak is the position of its largest value (earliest on ties).
struct Cluster {
  std::size_t start;
  std::size_t end;
  std::size_t peak;
  double peak_value;
};

struct ClusterSet {
  std::vector<Cluster> clusters;
  double threshold;
  std::size_t run_length;
  std::size_t n_exceed;  // total exceedances across all clusters
};

// Mean excess over each grid threshold. The grid must be strictly
// increasing. Empty data yields an empty curve.
std::vector<MrlPoint> mrl_curve(std::span<const double> data,
                                std::span<const double> grid);

// Equally spaced candidate thresholds from the 50th to the 99th sample
// percentile.
std::vector<double> default_mrl_grid(std::span<const double> data,
                                     std::size_t n_points = 200);

// Indices and excesses of observations strictly above u, in series order.
std::pair<std::vector<std::size_t>, std::vector<double>> extract_excesses(
    std::span<const double> data, double u);

// Runs declustering: a cluster of exceedances terminates once at least
// run_length consecutive observations fall at or below u. run_length >= 1.
ClusterSet decluster(std::span<const double> data, double u,
                     std::size_t run_length);

// As above, but a true break flag additionally terminates any open cluster
// before the flagged observation. break_before must be empty or match data
// in length; observations across a break are never cluster-adjacent.
ClusterSet decluster(std::span<const double> data,
                     std::span<const std::uint8_t> break_before, double u,
                     std::size_t run_length);

// Runs estimator of the extremal index: clusters / exceedances. Requires at
// least one exceedance.
double runs_theta(std::span<const double> data, double u,
                  std::size_t run_length);

}  // namespace petx

#endif  // PETX_THRESHOLD_HPP
