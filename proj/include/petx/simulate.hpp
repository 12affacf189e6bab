#ifndef PETX_SIMULATE_HPP
#define PETX_SIMULATE_HPP

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "petx/evd.hpp"
#include "petx/likelihood.hpp"
#include "petx/rng.hpp"

// Synthetic data generation from the fitted model class: first-order Markov
// chains with logistic dependence on the unit Frechet scale, inverse
// transformation to the data scale, the simulation estimator of the extremal
// index as a function of the dependence parameter, and return levels.

namespace petx {

// Describes one synthetic site: per-period lengths, generating parameters,
// threshold, per-period exceedance rates, and the day structure (chains
// restart at each day boundary).
struct SimSpec {
  std::array<std::size_t, 2> n_per_period{0, 0};
  ModelParams theta{0.0, 0.0, 0.0, 0.5};
  double threshold = 0.0;
  std::array<double, 2> exceed_rate{0.1, 0.1};
  std::uint64_t seed = 1;
  std::size_t day_length = 72;
};

// Stationary logistic Markov chain with unit Frechet margins. The first
// value is a Frechet draw; each transition samples the conditional
// distribution implied by the bivariate logistic by bracketed bisection to
// an absolute probability tolerance of 1e-10. alpha = 1 draws independently.
std::vector<double> simulate_logistic_chain(std::size_t n, double alpha,
                                            std::uint64_t seed);

// Continuation form drawing from a caller-owned generator.
std::vector<double> simulate_logistic_chain(std::size_t n, double alpha,
                                            SplitMix64& rng);

// Maps Frechet-scale values to the data scale. Position i belongs to period
// 0 while i < n_per_period[0], then period 1; values above the period's
// censor point invert the semiparametric transform into threshold excesses,
// the rest become placeholder sub-threshold values uniform on
// (threshold-5, threshold). Placeholder draws come from a stream derived
// from spec.seed, so the output is deterministic.
std::vector<double> frechet_to_data(std::span<const double> z,
                                    const SimSpec& spec);

// Full synthetic series: per period, chains of day_length values (fresh
// chain each day) are generated and mapped to the data scale; break flags
// mark day starts and the period boundary. The returned series carries the
// empirical exceedance rates, as a prepared real series would.
PreparedSeries simulate_series(const SimSpec& spec);

// Extremal index of the logistic Markov chain, estimated by simulating a
// chain of length sim_n (>= 1e5) and applying the runs estimator at the
// level_q Frechet quantile. The default level is far enough into the tail
// that the runs estimator's finite-level bias stays within a percent.
double theta_from_alpha(double alpha, std::size_t sim_n = 1000000,
                        double level_q = 0.999, std::size_t run_length = 10,
                        std::uint64_t seed = 0x87e7a);

// Level exceeded once per m observations on average, accounting for
// clustering through the extremal index:
//   threshold + scale/shape * ((m * rate * theta)^shape - 1)
// with the log form at shape 0. Requires m * rate * theta > 1.
double return_level(double m, const ThresholdModel& tm, double theta);

}  // namespace petx

#endif  // PETX_SIMULATE_HPP
