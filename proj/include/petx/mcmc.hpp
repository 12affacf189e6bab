#ifndef PETX_MCMC_HPP
#define PETX_MCMC_HPP

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "petx/likelihood.hpp"

// Component-wise normal random-walk Metropolis-Hastings over ModelParams,
// with pilot tuning of the proposal scales, burn-in, thinning, posterior
// summaries, and chain diagnostics.
//
// Components update in the order (beta0, beta1, shape, alpha); alpha is
// proposed on the logit scale with the matching Jacobian correction, so its
// draws stay inside (0,1). A proposal scale of exactly 0 holds that
// component fixed at its initial value throughout (used by the modes that do
// not update alpha, and by tests that sample lower-dimensional targets).

namespace petx {

struct McmcConfig {
  std::size_t retained_draws = 100000;
  std::size_t thin = 10;
  std::size_t burn_in = 2000;  // in retained-draw units, removed post-thinning
  std::uint64_t seed = 1;
  std::size_t pilot_iterations = 5000;
  double target_acceptance = 0.44;
};

using LogTarget = std::function<double(const ModelParams&)>;

struct Chain {
  std::vector<ModelParams> draws;            // post burn-in, post thinning
  std::array<double, 4> acceptance_rate{};   // NaN for held components
  std::uint64_t raw_iterations = 0;
};

struct ParamSummary {
  double mean;
  double sd;
  double q025;
  double q975;
};

// Order matches the update order: beta0, beta1, shape, alpha.
struct PosteriorSummary {
  std::array<ParamSummary, 4> param;
};

struct Diagnostics {
  std::array<double, 4> acceptance_rate;
  std::array<std::array<double, 50>, 4> autocorr;  // lags 1..50
  std::array<double, 4> ess;
  std::array<bool, 4> degenerate;
};

// Runs the sampler. Requires a finite log-target at init (throws
// std::invalid_argument otherwise). NaN target values are treated as
// -infinity. Deterministic given (target, init, scales, cfg).
Chain run_mh(const LogTarget& target, const ModelParams& init,
             const std::array<double, 4>& scales, const McmcConfig& cfg);

// Multiplicative adaptation of the proposal scales over cfg.pilot_iterations
// sweeps, aiming for per-component acceptance inside
// [target_acceptance - 0.1, target_acceptance + 0.1]. Adaptation happens
// only here; the returned scales are then fixed for run_mh. If the band is
// not reached within the budget, returns the best scales found and warns on
// stderr. Zero entries of initial_scales stay zero (held components).
std::array<double, 4> pilot_tune(
    const LogTarget& target, const ModelParams& init, const McmcConfig& cfg,
    std::array<double, 4> initial_scales = {1.0, 1.0, 1.0, 1.0});

// Mean, sample sd, and interpolated 2.5%/97.5% quantiles per component.
PosteriorSummary summarize(const Chain& c);

// Acceptance rates, autocorrelations at lags 1..50, and effective sample
// size n / (1 + 2 * sum of leading positive autocorrelations). A constant
// component is flagged degenerate with ESS 0. Requires >= 100 draws.
Diagnostics diagnostics(const Chain& c);

// Component access in update order (0..3).
double param_get(const ModelParams& m, int j);
void param_set(ModelParams& m, int j, double v);

}  // namespace petx

#endif  // PETX_MCMC_HPP
