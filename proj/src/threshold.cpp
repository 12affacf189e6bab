#include "petx/threshold.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "petx/stats.hpp"

namespace petx {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

std::vector<MrlPoint> mrl_curve(std::span<const double> data,
                                std::span<const double> grid) {
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1]))
      throw std::invalid_argument("threshold grid must be strictly increasing");
  if (data.empty()) return {};

  std::vector<MrlPoint> curve;
  curve.reserve(grid.size());
  std::vector<double> excess;
  for (double u : grid) {
    excess.clear();
    for (double x : data)
      if (x > u) excess.push_back(x - u);
    MrlPoint pt{u, kNaN, excess.size(), kNaN};
    if (!excess.empty()) pt.mean_excess = mean(excess);
    if (excess.size() >= 2)
      pt.ci_halfwidth =
          1.96 * sample_sd(excess) / std::sqrt(static_cast<double>(excess.size()));
    curve.push_back(pt);
  }
  return curve;
}

std::vector<double> default_mrl_grid(std::span<const double> data,
                                     std::size_t n_points) {
  if (data.empty()) throw std::invalid_argument("cannot build a grid from empty data");
  if (n_points < 2) throw std::invalid_argument("grid needs at least two points");
  std::vector<double> sorted(data.begin(), data.end());
  std::sort(sorted.begin(), sorted.end());
  double lo = quantile_sorted(sorted, 0.50);
  double hi = quantile_sorted(sorted, 0.99);
  if (!(hi > lo))
    throw std::invalid_argument("sample quantiles are degenerate; choose a grid manually");
  std::vector<double> grid(n_points);
  for (std::size_t i = 0; i < n_points; ++i)
    grid[i] = lo + (hi - lo) * static_cast<double>(i) /
                       static_cast<double>(n_points - 1);
  return grid;
}

std::pair<std::vector<std::size_t>, std::vector<double>> extract_excesses(
    std::span<const double> data, double u) {
  std::vector<std::size_t> idx;
  std::vector<double> excess;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data[i] > u) {
      idx.push_back(i);
      excess.push_back(data[i] - u);
    }
  }
  return {std::move(idx), std::move(excess)};
}

ClusterSet decluster(std::span<const double> data,
                     std::span<const std::uint8_t> break_before, double u,
                     std::size_t run_length) {
  if (run_length == 0) throw std::invalid_argument("run length must be at least 1");
  if (!break_before.empty() && break_before.size() != data.size())
    throw std::invalid_argument("break flags must match the data length");

  ClusterSet out{{}, u, run_length, 0};
  bool open = false;
  std::size_t sub_run = 0;  // consecutive sub-threshold count since last exceedance
  Cluster cur{};
  auto close = [&] {
    if (open) out.clusters.push_back(cur);
    open = false;
  };
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!break_before.empty() && break_before[i]) close();
    if (data[i] > u) {
      ++out.n_exceed;
      if (!open) {
        cur = {i, i, i, data[i]};
        open = true;
      } else {
        cur.end = i;
        if (data[i] > cur.peak_value) {
          cur.peak = i;
          cur.peak_value = data[i];
        }
      }
      sub_run = 0;
    } else if (open) {
      if (++sub_run >= run_length) close();
    }
  }
  close();
  return out;
}

ClusterSet decluster(std::span<const double> data, double u,
                     std::size_t run_length) {
  return decluster(data, {}, u, run_length);
}

double runs_theta(std::span<const double> data, double u,
                  std::size_t run_length) {
  ClusterSet cs = decluster(data, u, run_length);
  if (cs.n_exceed == 0)
    throw std::domain_error("extremal index is undefined without exceedances");
  return static_cast<double>(cs.clusters.size()) /
         static_cast<double>(cs.n_exceed);
}

}  // namespace petx
