#include "petx/mcmc.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <stdexcept>

#include "petx/rng.hpp"
#include "petx/stats.hpp"

namespace petx {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double logit(double a) { return std::log(a) - std::log1p(-a); }
double expit(double e) { return 1.0 / (1.0 + std::exp(-e)); }

// log of the derivative of expit at the point with value a in (0,1).
double log_expit_jacobian(double a) { return std::log(a) + std::log1p(-a); }

double safe_target(const LogTarget& target, const ModelParams& m) {
  double v = target(m);
  return std::isnan(v) ? -kInf : v;
}

// One sweep of component-wise updates. cur and lp_cur are updated in place;
// accepts[j] increments on acceptance of component j. Held components
// (scale 0) are skipped without consuming randomness.
void sweep(const LogTarget& target, ModelParams& cur, double& lp_cur,
           const std::array<double, 4>& scales, SplitMix64& rng,
           std::array<std::uint64_t, 4>* accepts) {
  for (int j = 0; j < 4; ++j) {
    if (scales[j] == 0.0) continue;
    double step = scales[j] * standard_normal(rng);
    double u = uniform01(rng);
    ModelParams prop = cur;
    double log_ratio;
    if (j == 3) {
      double eta = logit(cur.alpha) + step;
      prop.alpha = expit(eta);
      double lp_prop = safe_target(target, prop);
      log_ratio = lp_prop - lp_cur + log_expit_jacobian(prop.alpha) -
                  log_expit_jacobian(cur.alpha);
      if (std::log(u) < log_ratio) {
        cur = prop;
        lp_cur = lp_prop;
        if (accepts) (*accepts)[j] += 1;
      }
    } else {
      param_set(prop, j, param_get(cur, j) + step);
      double lp_prop = safe_target(target, prop);
      log_ratio = lp_prop - lp_cur;
      if (std::log(u) < log_ratio) {
        cur = prop;
        lp_cur = lp_prop;
        if (accepts) (*accepts)[j] += 1;
      }
    }
  }
}

}  // namespace

double param_get(const ModelParams& m, int j) {
  switch (j) {
    case 0: return m.beta0;
    case 1: return m.beta1;
    case 2: return m.shape;
    case 3: return m.alpha;
  }
  throw std::out_of_range("parameter index must be 0..3");
}

void param_set(ModelParams& m, int j, double v) {
  switch (j) {
    case 0: m.beta0 = v; return;
    case 1: m.beta1 = v; return;
    case 2: m.shape = v; return;
    case 3: m.alpha = v; return;
  }
  throw std::out_of_range("parameter index must be 0..3");
}

Chain run_mh(const LogTarget& target, const ModelParams& init,
             const std::array<double, 4>& scales, const McmcConfig& cfg) {
  if (cfg.retained_draws == 0 || cfg.thin == 0)
    throw std::invalid_argument("retained_draws and thin must be at least 1");
  if (scales[3] != 0.0 && !(init.alpha > 0.0 && init.alpha < 1.0))
    throw std::invalid_argument("alpha updates need an initial alpha in (0,1)");
  ModelParams cur = init;
  double lp_cur = safe_target(target, cur);
  if (!std::isfinite(lp_cur))
    throw std::invalid_argument(
        "sampler initialization requires a finite log-target");

  SplitMix64 rng(cfg.seed);
  Chain chain;
  chain.draws.reserve(cfg.retained_draws);
  const std::uint64_t burn_raw =
      static_cast<std::uint64_t>(cfg.burn_in) * cfg.thin;
  chain.raw_iterations =
      (static_cast<std::uint64_t>(cfg.retained_draws) + cfg.burn_in) * cfg.thin;

  std::array<std::uint64_t, 4> accepts{};
  std::uint64_t post_burn_sweeps = 0;
  for (std::uint64_t it = 1; it <= chain.raw_iterations; ++it) {
    bool post_burn = it > burn_raw;
    sweep(target, cur, lp_cur, scales, rng, post_burn ? &accepts : nullptr);
    if (post_burn) {
      ++post_burn_sweeps;
      if ((it - burn_raw) % cfg.thin == 0) chain.draws.push_back(cur);
    }
  }
  for (int j = 0; j < 4; ++j)
    chain.acceptance_rate[j] =
        scales[j] == 0.0 ? kNaN
                         : static_cast<double>(accepts[j]) /
                               static_cast<double>(post_burn_sweeps);
  return chain;
}

std::array<double, 4> pilot_tune(const LogTarget& target,
                                 const ModelParams& init,
                                 const McmcConfig& cfg,
                                 std::array<double, 4> initial_scales) {
  ModelParams cur = init;
  double lp_cur = safe_target(target, cur);
  if (!std::isfinite(lp_cur))
    throw std::invalid_argument(
        "pilot tuning requires a finite log-target at the initial point");

  SplitMix64 rng(derive_seed(cfg.seed, "pilot"));
  std::array<double, 4> sd = initial_scales;
  std::array<double, 4> best = initial_scales;
  std::array<double, 4> best_err;
  best_err.fill(kInf);
  const double t = cfg.target_acceptance;

  constexpr std::size_t kBatch = 100;
  std::size_t n_batches = std::max<std::size_t>(1, cfg.pilot_iterations / kBatch);
  for (std::size_t b = 1; b <= n_batches; ++b) {
    std::array<std::uint64_t, 4> accepts{};
    for (std::size_t i = 0; i < kBatch; ++i)
      sweep(target, cur, lp_cur, sd, rng, &accepts);
    // Multiplicative log-scale adjustment with a decaying step; components
    // already inside the band are left alone.
    double step = 4.0 / std::sqrt(static_cast<double>(b));
    for (int j = 0; j < 4; ++j) {
      if (sd[j] == 0.0) continue;
      double rate = static_cast<double>(accepts[j]) / static_cast<double>(kBatch);
      double err = std::abs(rate - t);
      if (err < best_err[j]) {
        best_err[j] = err;
        best[j] = sd[j];
      }
      if (err > 0.1) sd[j] *= std::exp((rate - t) * step);
    }
  }
  // Judge the band on a longer frozen-scale window; a single batch of 100 is
  // noisy enough to stray outside it even at the optimal scale.
  constexpr std::size_t kConfirm = 500;
  std::array<std::uint64_t, 4> confirm{};
  for (std::size_t i = 0; i < kConfirm; ++i)
    sweep(target, cur, lp_cur, sd, rng, &confirm);
  bool all_in_band = true;
  for (int j = 0; j < 4; ++j) {
    if (sd[j] == 0.0) continue;
    double rate =
        static_cast<double>(confirm[j]) / static_cast<double>(kConfirm);
    if (std::abs(rate - t) > 0.1) {
      all_in_band = false;
      sd[j] = best[j];
    }
  }
  if (!all_in_band)
    std::cerr << "pilot_tune: acceptance band not reached within the pilot "
                 "budget; using the best scales found\n";
  return sd;
}

PosteriorSummary summarize(const Chain& c) {
  if (c.draws.empty()) throw std::invalid_argument("cannot summarize an empty chain");
  PosteriorSummary out;
  std::vector<double> x(c.draws.size());
  for (int j = 0; j < 4; ++j) {
    for (std::size_t i = 0; i < c.draws.size(); ++i)
      x[i] = param_get(c.draws[i], j);
    double m = mean(x);
    double s = c.draws.size() < 2 ? 0.0 : sample_sd(x);
    std::sort(x.begin(), x.end());
    out.param[j] = {m, s, quantile_sorted(x, 0.025), quantile_sorted(x, 0.975)};
  }
  return out;
}

Diagnostics diagnostics(const Chain& c) {
  const std::size_t n = c.draws.size();
  if (n < 100)
    throw std::invalid_argument("diagnostics need at least 100 draws");
  Diagnostics d;
  d.acceptance_rate = c.acceptance_rate;
  std::vector<double> x(n);
  for (int j = 0; j < 4; ++j) {
    for (std::size_t i = 0; i < n; ++i) x[i] = param_get(c.draws[i], j);
    double m = mean(x);
    double denom = 0.0;
    for (double v : x) denom += (v - m) * (v - m);
    if (denom == 0.0) {
      d.degenerate[j] = true;
      d.autocorr[j].fill(0.0);
      d.ess[j] = 0.0;
      continue;
    }
    d.degenerate[j] = false;
    double tail_sum = 0.0;
    bool stop = false;
    for (std::size_t k = 1; k <= 50; ++k) {
      double num = 0.0;
      if (k < n)
        for (std::size_t i = 0; i + k < n; ++i)
          num += (x[i] - m) * (x[i + k] - m);
      double rho = num / denom;
      d.autocorr[j][k - 1] = rho;
      if (!stop) {
        if (rho <= 0.0)
          stop = true;
        else
          tail_sum += rho;
      }
    }
    double ess = static_cast<double>(n) / (1.0 + 2.0 * tail_sum);
    d.ess[j] = std::clamp(ess, 1.0, static_cast<double>(n));
  }
  return d;
}

}  // namespace petx
