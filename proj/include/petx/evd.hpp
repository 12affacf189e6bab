#ifndef PETX_EVD_HPP
#define PETX_EVD_HPP

// Probability kernels for threshold exceedance modelling: generalized Pareto
// and generalized extreme value distributions, the semiparametric transform
// to unit Frechet margins, and the bivariate logistic family with its
// partial derivatives.
//
// Error conventions: invalid parameter values (non-positive scale, dependence
// parameter outside (0,1]) throw std::invalid_argument; invalid function
// arguments (probability outside [0,1), data at or below the threshold)
// throw std::domain_error.

namespace petx {

// Shape values with |shape| below this tolerance use the shape -> 0 analytic
// limit; the general power-form expression loses all precision there.
inline constexpr double kShapeZeroTol = 1e-8;

// Generalized Pareto excess distribution. Excess y >= 0; when shape < 0 the
// support is bounded above by -scale/shape.
struct GpdParams {
  double scale;  // > 0, same units as the data
  double shape;  // unconstrained
};

// Generalized extreme value distribution for block maxima.
struct GevParams {
  double location;
  double scale;  // > 0
  double shape;
};

// Tail model above a fixed threshold: with probability exceed_rate an
// observation exceeds the threshold, and its excess is GPD distributed.
// Below the threshold the distribution is left unspecified.
struct ThresholdModel {
  double threshold;
  double exceed_rate;  // in (0,1]
  GpdParams gpd;
};

// P(Y <= y) for a GPD excess. Returns 1 beyond the upper endpoint when
// shape < 0, and 0 for y <= 0.
double gpd_cdf(double y, const GpdParams& p);

// Log-density of the GPD at excess y; -infinity outside the support.
double gpd_logpdf(double y, const GpdParams& p);

// Inverse of gpd_cdf on [0,1). Round-trips with gpd_cdf to within 1e-10.
double gpd_quantile(double prob, const GpdParams& p);

// GEV distribution function; returns the appropriate 0/1 limit outside the
// support.
double gev_cdf(double y, const GevParams& p);

// GPD scale implied by a GEV fit when excesses over threshold u are modelled:
// scale + shape * (u - location). Throws if the result is not positive.
double gev_to_gpd_scale(const GevParams& g, double u);

// Maps a data value x > threshold to the unit Frechet scale via
// z = -1 / log Ftilde(x) with Ftilde(x) = 1 - exceed_rate * (1 - gpd_cdf(x-u)).
// Sub-threshold values have no pointwise image; use frechet_censor_point.
// Returns +infinity when x lies beyond a bounded upper endpoint.
double to_frechet(double x, const ThresholdModel& tm);

// Frechet-scale censoring point for sub-threshold observations:
// -1 / log(1 - exceed_rate). Requires exceed_rate in (0,1); a rate of 1
// leaves no sub-threshold mass and makes censoring degenerate.
double frechet_censor_point(const ThresholdModel& tm);

// Bivariate logistic distribution function with unit Frechet margins:
//   G(z1, z2) = exp{ -(z1^(-1/alpha) + z2^(-1/alpha))^alpha }
// alpha in (0,1]; alpha = 1 is exact independence, alpha -> 0 is perfect
// dependence. The partial derivative is taken in the first argument; the
// density is the mixed second partial. The log variants evaluate entirely in
// log space and are safe for extreme argument magnitudes.
double logistic_cdf(double z1, double z2, double alpha);
double logistic_partial(double z1, double z2, double alpha);
double logistic_density(double z1, double z2, double alpha);
double logistic_logcdf(double z1, double z2, double alpha);
double logistic_logpartial(double z1, double z2, double alpha);
double logistic_logdensity(double z1, double z2, double alpha);

}  // namespace petx

#endif  // PETX_EVD_HPP
