#include "petx/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "petx/threshold.hpp"

namespace petx {

namespace {

double frechet_draw(SplitMix64& rng) { return -1.0 / std::log(uniform01(rng)); }

// Conditional distribution function of the next chain value given the
// previous one, for the bivariate logistic with parameter alpha:
//   C(z2 | z1) = exp(1/z1) * dG(z1, z2)/dz1.
// Evaluated from log z2 with the radial term of z1 precomputed.
struct ConditionalCdf {
  double alpha;
  double inv_alpha;
  double r1;     // z1^(-1/alpha)
  double lz1;    // log z1
  double zinv1;  // 1/z1

  double operator()(double lz2) const {
    double q2 = std::exp(-lz2 * inv_alpha);
    double logs = std::log(r1 + q2);
    double v = std::exp(alpha * logs);
    return std::exp(-v + zinv1 + (alpha - 1.0) * (logs + lz1 * inv_alpha));
  }
};

// Inverts the conditional cdf at probability u by bisection over log z2.
double conditional_quantile(double z1, double alpha, double u) {
  ConditionalCdf cdf{alpha, 1.0 / alpha, std::exp(-std::log(z1) / alpha),
                     std::log(z1), 1.0 / z1};
  double lo = -50.0, hi = 50.0;
  while (cdf(lo) > u && lo > -700.0) lo -= 50.0;
  while (cdf(hi) < u && hi < 700.0) hi += 50.0;
  double mid = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    mid = 0.5 * (lo + hi);
    double c = cdf(mid);
    if (std::abs(c - u) <= 1e-10 || hi - lo < 1e-13) break;
    (c < u ? lo : hi) = mid;
  }
  return std::exp(mid);
}

}  // namespace

std::vector<double> simulate_logistic_chain(std::size_t n, double alpha,
                                            SplitMix64& rng) {
  if (n == 0) throw std::invalid_argument("chain length must be at least 1");
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw std::invalid_argument("logistic dependence parameter must lie in (0,1]");
  std::vector<double> z(n);
  z[0] = frechet_draw(rng);
  for (std::size_t i = 1; i < n; ++i) {
    if (alpha == 1.0)
      z[i] = frechet_draw(rng);
    else
      z[i] = conditional_quantile(z[i - 1], alpha, uniform01(rng));
  }
  return z;
}

std::vector<double> simulate_logistic_chain(std::size_t n, double alpha,
                                            std::uint64_t seed) {
  SplitMix64 rng(seed);
  return simulate_logistic_chain(n, alpha, rng);
}

std::vector<double> frechet_to_data(std::span<const double> z,
                                    const SimSpec& spec) {
  if (z.size() != spec.n_per_period[0] + spec.n_per_period[1])
    throw std::invalid_argument(
        "Frechet sequence length must match the period counts");
  std::array<double, 2> sig{};
  std::array<double, 2> zc{};
  for (int t = 0; t < 2; ++t) {
    if (spec.n_per_period[t] == 0) continue;
    double lam = spec.exceed_rate[t];
    if (!(lam > 0.0 && lam < 1.0))
      throw std::invalid_argument("exceedance rates must lie strictly in (0,1)");
    sig[t] = scale_at(spec.theta.beta0, spec.theta.beta1, t);
    if (!std::isfinite(sig[t]) || sig[t] <= 0.0)
      throw std::invalid_argument("scale parameters are out of range");
    zc[t] = -1.0 / std::log1p(-lam);
  }

  SplitMix64 sub_rng(derive_seed(spec.seed, "subthreshold"));
  std::vector<double> x(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    int t = i < spec.n_per_period[0] ? 0 : 1;
    bool extreme = false;
    if (z[i] > zc[t]) {
      double s = -std::expm1(-1.0 / z[i]);  // upper tail mass at z[i]
      double p = 1.0 - s / spec.exceed_rate[t];
      if (p > 0.0) {
        x[i] = spec.threshold +
               gpd_quantile(p, GpdParams{sig[t], spec.theta.shape});
        extreme = true;
      }
    }
    if (!extreme) x[i] = spec.threshold - 5.0 * uniform01(sub_rng);
  }
  return x;
}

PreparedSeries simulate_series(const SimSpec& spec) {
  if (spec.day_length == 0)
    throw std::invalid_argument("day length must be at least 1");
  const std::size_t n = spec.n_per_period[0] + spec.n_per_period[1];
  if (n == 0) throw std::invalid_argument("empty simulation request");

  SplitMix64 chain_rng(derive_seed(spec.seed, "chain"));
  std::vector<double> z;
  z.reserve(n);
  std::vector<std::uint8_t> period(n);
  std::vector<std::uint8_t> breaks(n, 0);
  std::size_t pos = 0;
  for (int t = 0; t < 2; ++t) {
    std::size_t remaining = spec.n_per_period[t];
    while (remaining > 0) {
      std::size_t seg = std::min(spec.day_length, remaining);
      breaks[pos] = 1;
      auto day = simulate_logistic_chain(seg, spec.theta.alpha, chain_rng);
      z.insert(z.end(), day.begin(), day.end());
      for (std::size_t i = 0; i < seg; ++i) period[pos + i] = static_cast<std::uint8_t>(t);
      pos += seg;
      remaining -= seg;
    }
  }
  std::vector<double> values = frechet_to_data(z, spec);
  return make_series(std::move(values), std::move(period), std::move(breaks),
                     spec.threshold);
}

double theta_from_alpha(double alpha, std::size_t sim_n, double level_q,
                        std::size_t run_length, std::uint64_t seed) {
  if (sim_n < 100000)
    throw std::invalid_argument(
        "extremal index estimation needs a chain of at least 1e5");
  if (!(level_q > 0.0 && level_q < 1.0))
    throw std::invalid_argument("quantile level must lie in (0,1)");
  std::vector<double> z = simulate_logistic_chain(sim_n, alpha, seed);
  double zq = -1.0 / std::log(level_q);
  return runs_theta(z, zq, run_length);
}

double return_level(double m, const ThresholdModel& tm, double theta) {
  if (!(tm.gpd.scale > 0.0))
    throw std::invalid_argument("scale must be positive");
  if (!(theta > 0.0 && theta <= 1.0))
    throw std::invalid_argument("extremal index must lie in (0,1]");
  if (!(tm.exceed_rate > 0.0 && tm.exceed_rate <= 1.0))
    throw std::invalid_argument("exceedance rate must lie in (0,1]");
  double r = m * tm.exceed_rate * theta;
  if (!(r > 1.0))
    throw std::domain_error(
        "return period does not reach above the threshold");
  if (std::abs(tm.gpd.shape) < kShapeZeroTol)
    return tm.threshold + tm.gpd.scale * std::log(r);
  return tm.threshold +
         tm.gpd.scale / tm.gpd.shape * (std::pow(r, tm.gpd.shape) - 1.0);
}

}  // namespace petx
