#ifndef PETX_LIKELIHOOD_HPP
#define PETX_LIKELIHOOD_HPP

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <vector>

// Log-likelihoods for the three analysis modes of a before/after threshold
// study: treating exceedances as independent, declustering to cluster peaks,
// and a first-order Markov chain of exceedances with logistic dependence and
// censoring of sub-threshold observations. Also the prior and the
// unnormalized log-posterior.
//
// All likelihoods return -infinity (never throw) for parameter values that
// put an observed excess outside the GPD support, so samplers can treat the
// value as a rejection.

namespace petx {

// Model parameter vector: period-dependent log-scale, common shape, and the
// logistic dependence parameter.
//   scale(t) = exp(beta0 + beta1 * t),  t = 0 before, t = 1 after.
struct ModelParams {
  double beta0;
  double beta1;
  double shape;
  double alpha;  // in (0,1]; unused by the independent/declustered modes
};

enum class FitMode { ignore_dependence, decluster, markov };

// A site's series prepared for fitting: negated PET values in time order,
// before-period entries first. break_before[i] marks that observation i does
// not follow observation i-1 in time (day boundary, missing interval, or the
// before/after boundary); the first observation is always a break.
// exceed_rate[t] is the fraction of period-t observations above threshold.
struct PreparedSeries {
  std::vector<double> values;
  std::vector<std::uint8_t> period;  // 0 or 1
  std::vector<std::uint8_t> exceed;  // values[i] > threshold
  std::vector<std::uint8_t> break_before;
  double threshold = 0.0;
  std::array<double, 2> exceed_rate{0.0, 0.0};
  std::array<std::size_t, 2> n_period{0, 0};
};

// Builds a PreparedSeries from raw components, deriving the exceedance flags
// and the empirical per-period exceedance rates. break_before may be empty
// (no internal breaks). Throws std::invalid_argument on mismatched lengths
// or period values outside {0,1}.
PreparedSeries make_series(std::vector<double> values,
                           std::vector<std::uint8_t> period,
                           std::vector<std::uint8_t> break_before,
                           double threshold);

// Independent normal priors for the three GPD-side parameters; the
// dependence parameter has a uniform prior on (0,1].
struct NormalPrior {
  double mean;
  double variance;
};
struct PriorSpec {
  NormalPrior beta0{0.0, 10.0};
  NormalPrior beta1{0.0, 10.0};
  NormalPrior shape{0.0, 100.0};
};

// exp(beta0 + beta1 * t) for t in {0,1}.
double scale_at(double beta0, double beta1, int t);

// Sum of GPD log-densities over all excesses, each with its period's scale.
double loglik_independent(double beta0, double beta1, double shape,
                          const PreparedSeries& s);

// Cluster-peak excesses per period, from runs declustering of the prepared
// series with its break structure.
struct PeakData {
  std::array<std::vector<double>, 2> excess;
};
PeakData peak_excesses(const PreparedSeries& s, std::size_t run_length);

// Identical computation to loglik_independent, restricted to cluster peaks.
double loglik_declustered(double beta0, double beta1, double shape,
                          const PeakData& peaks);

// Censored Markov-chain log-likelihood. Each observation maps to the unit
// Frechet scale through its period's threshold model; consecutive pairs
// within an unbroken segment contribute the bivariate logistic density
// (both exceed), its partial derivative (one exceeds), or its distribution
// function at the censoring points (neither), and interior points of each
// segment contribute their marginal once with negative sign. A segment of
// length one contributes just its marginal. Requires both periods present in
// the series to have an exceedance rate strictly inside (0,1).
double loglik_markov(const ModelParams& theta, const PreparedSeries& s);

// Reusable evaluator behind loglik_markov. Construction precomputes the
// pair/segment index structure; evaluation is vectorized and caches the
// per-observation transform stage, so updates that change only alpha skip
// most of the work. One instance serves one sampling chain; concurrent calls
// on the same instance are not safe (distinct instances are).
class MarkovLikelihood {
 public:
  explicit MarkovLikelihood(const PreparedSeries& s);
  ~MarkovLikelihood();
  MarkovLikelihood(MarkovLikelihood&&) noexcept;
  MarkovLikelihood& operator=(MarkovLikelihood&&) noexcept;

  double operator()(const ModelParams& theta) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Normal log-densities for (beta0, beta1, shape) plus the uniform density
// for alpha; -infinity when alpha lies outside (0,1].
double log_prior(const ModelParams& theta, const PriorSpec& p);

// log_prior + the mode's log-likelihood. run_length is used only by the
// decluster mode. alpha does not enter the independent/declustered
// likelihoods.
double log_posterior(const ModelParams& theta, const PreparedSeries& s,
                     const PriorSpec& p, FitMode mode,
                     std::size_t run_length = 10);

}  // namespace petx

#endif  // PETX_LIKELIHOOD_HPP
