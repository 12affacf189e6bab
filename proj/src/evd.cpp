#include "petx/evd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace petx {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_scale(double scale) {
  if (!(scale > 0.0)) throw std::invalid_argument("scale must be positive");
}

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw std::invalid_argument("logistic dependence parameter must lie in (0,1]");
}

void check_frechet(double z) {
  if (!(z > 0.0)) throw std::domain_error("Frechet-scale value must be positive");
}

// log(z1^(-1/alpha) + z2^(-1/alpha)) evaluated from log(z1), log(z2) without
// overflow for extreme magnitudes.
double log_radial_sum(double lz1, double lz2, double alpha) {
  double a = -lz1 / alpha;
  double b = -lz2 / alpha;
  double hi = std::max(a, b);
  double lo = std::min(a, b);
  return hi + std::log1p(std::exp(lo - hi));
}

}  // namespace

double gpd_cdf(double y, const GpdParams& p) {
  check_scale(p.scale);
  if (y <= 0.0) return 0.0;
  if (std::abs(p.shape) < kShapeZeroTol) return -std::expm1(-y / p.scale);
  double t = p.shape * y / p.scale;
  if (t <= -1.0) return 1.0;
  return -std::expm1(-std::log1p(t) / p.shape);
}

double gpd_logpdf(double y, const GpdParams& p) {
  check_scale(p.scale);
  if (y < 0.0) return -kInf;
  if (std::abs(p.shape) < kShapeZeroTol) return -std::log(p.scale) - y / p.scale;
  double t = p.shape * y / p.scale;
  if (t <= -1.0) return -kInf;
  return -std::log(p.scale) - (1.0 + 1.0 / p.shape) * std::log1p(t);
}

double gpd_quantile(double prob, const GpdParams& p) {
  check_scale(p.scale);
  if (!(prob >= 0.0 && prob < 1.0))
    throw std::domain_error("quantile level must lie in [0,1)");
  if (prob == 0.0) return 0.0;
  double l = std::log1p(-prob);
  if (std::abs(p.shape) < kShapeZeroTol) return -p.scale * l;
  return p.scale * std::expm1(-p.shape * l) / p.shape;
}

double gev_cdf(double y, const GevParams& p) {
  check_scale(p.scale);
  double r = (y - p.location) / p.scale;
  if (std::abs(p.shape) < kShapeZeroTol) return std::exp(-std::exp(-r));
  double t = p.shape * r;
  if (t <= -1.0) return p.shape > 0.0 ? 0.0 : 1.0;
  return std::exp(-std::exp(-std::log1p(t) / p.shape));
}

double gev_to_gpd_scale(const GevParams& g, double u) {
  check_scale(g.scale);
  double s = g.scale + g.shape * (u - g.location);
  if (!(s > 0.0))
    throw std::invalid_argument("implied GPD scale at this threshold is not positive");
  return s;
}

double to_frechet(double x, const ThresholdModel& tm) {
  check_scale(tm.gpd.scale);
  if (!(tm.exceed_rate > 0.0 && tm.exceed_rate <= 1.0))
    throw std::invalid_argument("exceedance rate must lie in (0,1]");
  if (!(x > tm.threshold))
    throw std::domain_error("value at or below the threshold has no Frechet image; "
                            "use frechet_censor_point");
  double y = x - tm.threshold;
  double log_surv;  // log of the conditional excess survivor function
  if (std::abs(tm.gpd.shape) < kShapeZeroTol) {
    log_surv = -y / tm.gpd.scale;
  } else {
    double t = tm.gpd.shape * y / tm.gpd.scale;
    if (t <= -1.0) return kInf;
    log_surv = -std::log1p(t) / tm.gpd.shape;
  }
  double s = tm.exceed_rate * std::exp(log_surv);  // upper-tail mass above x
  double lf = std::log1p(-s);                      // log Ftilde(x), strictly < 0
  return -1.0 / lf;
}

double frechet_censor_point(const ThresholdModel& tm) {
  if (!(tm.exceed_rate > 0.0))
    throw std::invalid_argument("exceedance rate must lie in (0,1)");
  if (!(tm.exceed_rate < 1.0))
    throw std::invalid_argument("exceedance rate 1 leaves no sub-threshold mass; "
                                "censoring is degenerate");
  return -1.0 / std::log1p(-tm.exceed_rate);
}

double logistic_logcdf(double z1, double z2, double alpha) {
  check_alpha(alpha);
  check_frechet(z1);
  check_frechet(z2);
  if (alpha == 1.0) return -1.0 / z1 - 1.0 / z2;
  double logs = log_radial_sum(std::log(z1), std::log(z2), alpha);
  return -std::exp(alpha * logs);
}

double logistic_logpartial(double z1, double z2, double alpha) {
  check_alpha(alpha);
  check_frechet(z1);
  check_frechet(z2);
  double lz1 = std::log(z1);
  if (alpha == 1.0) return -1.0 / z1 - 1.0 / z2 - 2.0 * lz1;
  double lz2 = std::log(z2);
  double logs = log_radial_sum(lz1, lz2, alpha);
  double v = std::exp(alpha * logs);
  return -v + (alpha - 1.0) * logs + (-1.0 / alpha - 1.0) * lz1;
}

double logistic_logdensity(double z1, double z2, double alpha) {
  check_alpha(alpha);
  check_frechet(z1);
  check_frechet(z2);
  double lz1 = std::log(z1);
  double lz2 = std::log(z2);
  if (alpha == 1.0) return -1.0 / z1 - 1.0 / z2 - 2.0 * (lz1 + lz2);
  double logs = log_radial_sum(lz1, lz2, alpha);
  double v = std::exp(alpha * logs);
  double c = (1.0 - alpha) / alpha;
  return -v + (alpha - 2.0) * logs + (-1.0 / alpha - 1.0) * (lz1 + lz2) +
         std::log(v + c);
}

double logistic_cdf(double z1, double z2, double alpha) {
  return std::exp(logistic_logcdf(z1, z2, alpha));
}

double logistic_partial(double z1, double z2, double alpha) {
  return std::exp(logistic_logpartial(z1, z2, alpha));
}

double logistic_density(double z1, double z2, double alpha) {
  return std::exp(logistic_logdensity(z1, z2, alpha));
}

}  // namespace petx
