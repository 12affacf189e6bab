#include "petx/likelihood.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <utility>

#include "petx/evd.hpp"
#include "petx/threshold.hpp"

namespace petx {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

using Eigen::ArrayXd;

// Accurate elementwise log(1-s) for s in [0,1). The plain two-step
// log(1.0 - s) loses the entire result once s drops below machine epsilon,
// which the far tail of the transform reaches routinely; the standard
// correction log(u) * (-s) / (u - 1) with u = 1 - s restores it. Lanes with
// u == 1 take -s directly, so the division's NaN there is discarded.
ArrayXd log1m(const ArrayXd& s) {
  ArrayXd u = 1.0 - s;
  return ((u - 1.0) == 0.0).select(-s, u.log() * ((-s) / (u - 1.0)));
}

double normal_logpdf(double x, const NormalPrior& p) {
  double d = x - p.mean;
  return -0.5 * std::log(2.0 * std::numbers::pi * p.variance) -
         0.5 * d * d / p.variance;
}

}  // namespace

PreparedSeries make_series(std::vector<double> values,
                           std::vector<std::uint8_t> period,
                           std::vector<std::uint8_t> break_before,
                           double threshold) {
  const std::size_t n = values.size();
  if (period.size() != n)
    throw std::invalid_argument("period flags must match the values length");
  if (!break_before.empty() && break_before.size() != n)
    throw std::invalid_argument("break flags must match the values length");
  if (break_before.empty()) break_before.assign(n, 0);
  if (n > 0) break_before[0] = 1;

  PreparedSeries s;
  s.values = std::move(values);
  s.period = std::move(period);
  s.break_before = std::move(break_before);
  s.threshold = threshold;
  s.exceed.resize(n);
  std::array<std::size_t, 2> n_exc{0, 0};
  for (std::size_t i = 0; i < n; ++i) {
    if (s.period[i] > 1)
      throw std::invalid_argument("period flags must be 0 or 1");
    s.exceed[i] = s.values[i] > threshold ? 1 : 0;
    s.n_period[s.period[i]] += 1;
    n_exc[s.period[i]] += s.exceed[i];
  }
  for (int t = 0; t < 2; ++t)
    s.exceed_rate[t] = s.n_period[t] == 0
                           ? 0.0
                           : static_cast<double>(n_exc[t]) /
                                 static_cast<double>(s.n_period[t]);
  return s;
}

double scale_at(double beta0, double beta1, int t) {
  if (t != 0 && t != 1)
    throw std::invalid_argument("period indicator must be 0 or 1");
  return std::exp(beta0 + beta1 * static_cast<double>(t));
}

double loglik_independent(double beta0, double beta1, double shape,
                          const PreparedSeries& s) {
  // Gather excesses per period so each block shares one scale.
  std::array<std::vector<double>, 2> exc;
  for (std::size_t i = 0; i < s.values.size(); ++i)
    if (s.exceed[i]) exc[s.period[i]].push_back(s.values[i] - s.threshold);

  double total = 0.0;
  for (int t = 0; t < 2; ++t) {
    if (exc[t].empty()) continue;
    double logsig = beta0 + beta1 * t;
    double sig = std::exp(logsig);
    if (!std::isfinite(sig) || sig <= 0.0) return -kInf;
    Eigen::Map<const ArrayXd> y(exc[t].data(),
                                static_cast<Eigen::Index>(exc[t].size()));
    double n = static_cast<double>(exc[t].size());
    if (std::abs(shape) < kShapeZeroTol) {
      total += -n * logsig - y.sum() / sig;
    } else {
      if (shape < 0.0 && 1.0 + shape * y.maxCoeff() / sig <= 0.0) return -kInf;
      double sum_logsurv = (1.0 + (shape / sig) * y).log().sum() * (-1.0 / shape);
      total += -n * logsig + (1.0 + shape) * sum_logsurv;
    }
  }
  return std::isnan(total) ? -kInf : total;
}

PeakData peak_excesses(const PreparedSeries& s, std::size_t run_length) {
  ClusterSet cs = decluster(s.values, s.break_before, s.threshold, run_length);
  PeakData peaks;
  for (const Cluster& c : cs.clusters)
    peaks.excess[s.period[c.peak]].push_back(c.peak_value - s.threshold);
  return peaks;
}

double loglik_declustered(double beta0, double beta1, double shape,
                          const PeakData& peaks) {
  double total = 0.0;
  for (int t = 0; t < 2; ++t) {
    double sig = std::exp(beta0 + beta1 * t);
    if (!std::isfinite(sig) || sig <= 0.0) return -kInf;
    GpdParams p{sig, shape};
    for (double y : peaks.excess[t]) {
      double l = gpd_logpdf(y, p);
      if (l == -kInf) return -kInf;
      total += l;
    }
  }
  return std::isnan(total) ? -kInf : total;
}

// Precomputed evaluation structure for the censored Markov likelihood.
//
// The series is cut into unbroken segments. Within a segment, each
// consecutive pair contributes a bivariate term and each interior point's
// marginal is subtracted; a singleton segment contributes its marginal. All
// classification depends only on the data, so pair index lists, per-point
// pair multiplicities and marginal weights are fixed at construction, and an
// evaluation is a handful of vectorized passes over the exceedances plus
// reductions over the pair lists.
//
// Exceedance k carries, after the transform stage,
//   lz[k]  = log z_k on the Frechet scale and
//   logJ[k] = log of the data->Frechet Jacobian at k,
// and each pair needs q[k] = z_k^(-1/alpha). Writing s = q_a + q_b,
// V = s^alpha, and c = (1-alpha)/alpha, the pair terms reduce to
//   both exceed:  -V + (alpha-2) log s + log(V+c) + sum of lz * (-1/alpha-1)
//                 + sum of logJ over the two members,
//   one exceeds:  -V + (alpha-1) log s + (-1/alpha-1) lz + logJ,
//   neither:      log G at the two censor points (data-fixed arguments),
// so the lz and logJ parts fold into two weighted reductions with the
// per-point pair multiplicities, and only the q-dependent parts need the
// pair lists. Exceeding marginals collapse to log lambda + GPD log-density.
//
// The transform stage depends on (beta0, beta1, shape) only and is cached,
// so an alpha-only update reuses it.
struct MarkovLikelihood::Impl {
  // Data-fixed structure.
  ArrayXd y;        // excesses, series order
  ArrayXd p01;      // period of each exceedance as 0.0/1.0
  ArrayXd loglam;   // log exceedance rate of the period of each exceedance
  ArrayXd w_pair;   // pair-membership multiplicity per exceedance
  ArrayXd w_marg;   // +1 singleton segment, -1 interior point, else 0
  std::vector<std::int32_t> both_a, both_b;  // exceedance slots of both-exceed pairs
  std::vector<std::int32_t> one_idx;         // exceeding slot of mixed pairs
  ArrayXd one_c01;                           // censored side's period, 0.0/1.0
  double censor_const = 0.0;  // marginal weights on data-fixed censored terms
  double lzc[2] = {0.0, 0.0};  // log censor point per period
  double ymax[2] = {0.0, 0.0};
  bool period_present[2] = {false, false};
  std::size_t n_neither[2][2] = {{0, 0}, {0, 0}};

  // Transform-stage cache, keyed on the exact parameter values.
  mutable bool cache_valid = false;
  mutable double cb0 = 0.0, cb1 = 0.0, cxi = 0.0;
  mutable bool cache_supported = false;
  mutable ArrayXd lz;
  mutable double sum_marg = 0.0;    // (gpd log-density * w_marg) reduction
  mutable double sum_lz_pair = 0.0; // (lz * w_pair) reduction
  mutable double sum_j_pair = 0.0;  // (logJ * w_pair) reduction

  // Evaluation workspace, reused across calls.
  mutable ArrayXd t1, t2, t3, q;
  mutable ArrayXd bq, bl, bv, ob, ol, ov;

  explicit Impl(const PreparedSeries& s) { build(s); }

  void build(const PreparedSeries& s);
  bool refresh_transform(double b0, double b1, double xi) const;
  double eval(const ModelParams& th) const;
};

void MarkovLikelihood::Impl::build(const PreparedSeries& s) {
  const std::size_t n = s.values.size();
  if (s.period.size() != n || s.exceed.size() != n)
    throw std::invalid_argument("prepared series has mismatched field lengths");
  if (!s.break_before.empty() && s.break_before.size() != n)
    throw std::invalid_argument("prepared series has mismatched break flags");

  auto is_break = [&](std::size_t i) {
    return i == 0 || (!s.break_before.empty() && s.break_before[i]);
  };

  for (std::size_t i = 0; i < n; ++i) {
    if (s.period[i] > 1)
      throw std::invalid_argument("period flags must be 0 or 1");
    if ((s.values[i] > s.threshold) != (s.exceed[i] != 0))
      throw std::invalid_argument("exceedance flags disagree with the threshold");
    period_present[s.period[i]] = true;
  }
  for (int t = 0; t < 2; ++t) {
    if (!period_present[t]) continue;
    double lam = s.exceed_rate[t];
    if (!(lam > 0.0 && lam < 1.0))
      throw std::invalid_argument(
          "Markov likelihood needs an exceedance rate strictly inside (0,1) "
          "for every period present");
    lzc[t] = std::log(-1.0 / std::log1p(-lam));
  }

  // Slot numbering of exceedances and per-slot marginal/pair weights.
  std::vector<std::int32_t> slot(n, -1);
  std::vector<double> vy, vp, vl, vwp, vwm;
  for (std::size_t i = 0; i < n; ++i) {
    if (!s.exceed[i]) continue;
    slot[i] = static_cast<std::int32_t>(vy.size());
    int t = s.period[i];
    vy.push_back(s.values[i] - s.threshold);
    vp.push_back(static_cast<double>(t));
    vl.push_back(std::log(s.exceed_rate[t]));
    vwp.push_back(0.0);
    vwm.push_back(0.0);
    if (vy.back() > ymax[t]) ymax[t] = vy.back();
  }

  for (std::size_t i = 0; i < n; ++i) {
    bool first = is_break(i);
    bool last = (i + 1 == n) || is_break(i + 1);
    if (first && last) {  // singleton segment: marginal enters positively
      if (s.exceed[i])
        vwm[static_cast<std::size_t>(slot[i])] += 1.0;
      else
        censor_const += std::log1p(-s.exceed_rate[s.period[i]]);
    } else if (!first && !last) {  // interior point: marginal subtracted
      if (s.exceed[i])
        vwm[static_cast<std::size_t>(slot[i])] -= 1.0;
      else
        censor_const -= std::log1p(-s.exceed_rate[s.period[i]]);
    }
    if (!last) {  // pair (i, i+1)
      std::size_t j = i + 1;
      if (s.exceed[i] && s.exceed[j]) {
        both_a.push_back(slot[i]);
        both_b.push_back(slot[j]);
        vwp[static_cast<std::size_t>(slot[i])] += 1.0;
        vwp[static_cast<std::size_t>(slot[j])] += 1.0;
      } else if (s.exceed[i]) {
        one_idx.push_back(slot[i]);
        vwp[static_cast<std::size_t>(slot[i])] += 1.0;
      } else if (s.exceed[j]) {
        one_idx.push_back(slot[j]);
        vwp[static_cast<std::size_t>(slot[j])] += 1.0;
      } else {
        n_neither[s.period[i]][s.period[j]] += 1;
      }
    }
  }

  // Mixed pairs record the censored side's period in step with one_idx.
  std::vector<double> vc;
  vc.reserve(one_idx.size());
  {
    std::size_t k = 0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (is_break(i + 1)) continue;
      bool a = s.exceed[i], b = s.exceed[i + 1];
      if (a != b) {
        vc.push_back(static_cast<double>(a ? s.period[i + 1] : s.period[i]));
        ++k;
      }
    }
    if (k != one_idx.size())
      throw std::logic_error("mixed-pair bookkeeping out of step");
  }

  auto to_array = [](const std::vector<double>& v) {
    return Eigen::Map<const ArrayXd>(v.data(), static_cast<Eigen::Index>(v.size()))
        .eval();
  };
  y = to_array(vy);
  p01 = to_array(vp);
  loglam = to_array(vl);
  w_pair = to_array(vwp);
  w_marg = to_array(vwm);
  one_c01 = to_array(vc);

  // The constant part of the exceeding marginals (their log lambda factor)
  // folds into censor_const as well.
  censor_const += (w_marg * loglam).sum();

  const auto ne = y.size();
  lz.resize(ne);
  t1.resize(ne);
  t2.resize(ne);
  t3.resize(ne);
  q.resize(ne);
  bq.resize(static_cast<Eigen::Index>(both_a.size()));
  bl.resize(bq.size());
  bv.resize(bq.size());
  ob.resize(static_cast<Eigen::Index>(one_idx.size()));
  ol.resize(ob.size());
  ov.resize(ob.size());
}

// Recomputes the cached transform stage if (b0, b1, xi) changed. Returns
// false when some excess falls outside the GPD support.
bool MarkovLikelihood::Impl::refresh_transform(double b0, double b1,
                                               double xi) const {
  if (cache_valid && b0 == cb0 && b1 == cb1 && xi == cxi)
    return cache_supported;
  cache_valid = true;
  cb0 = b0;
  cb1 = b1;
  cxi = xi;
  cache_supported = false;

  double logsig0 = b0;
  double logsig1 = b0 + b1;
  double sig0 = std::exp(logsig0);
  double sig1 = std::exp(logsig1);
  if (!std::isfinite(sig0) || !std::isfinite(sig1) || sig0 <= 0.0 ||
      sig1 <= 0.0)
    return false;
  bool shape_zero = std::abs(xi) < kShapeZeroTol;
  if (!shape_zero && xi < 0.0) {
    for (int t = 0; t < 2; ++t)
      if (period_present[t] &&
          1.0 + xi * ymax[t] / (t == 0 ? sig0 : sig1) <= 0.0)
        return false;
  }

  // t1 <- log conditional survivor of each excess; t2 <- GPD log-density.
  if (shape_zero) {
    double i0 = 1.0 / sig0, i1 = 1.0 / sig1;
    t1 = -(y * (i0 + (i1 - i0) * p01));
  } else {
    double c0 = xi / sig0, c1 = xi / sig1;
    t1 = (1.0 + y * (c0 + (c1 - c0) * p01)).log() * (-1.0 / xi);
  }
  t2 = (1.0 + (shape_zero ? 0.0 : xi)) * t1 - (logsig0 + (logsig1 - logsig0) * p01);

  // t3 <- upper tail mass above each point; then its log(1-s) image.
  t3 = (loglam + t1).exp();
  t1 = log1m(t3);                 // log Ftilde, strictly negative
  lz = -((-t1).log());            // log z = -log(-log Ftilde)

  sum_marg = (t2 * w_marg).sum();
  sum_lz_pair = (lz * w_pair).sum();
  sum_j_pair = ((loglam + t2 + 2.0 * lz - t1) * w_pair).sum();
  cache_supported = true;
  return true;
}

double MarkovLikelihood::Impl::eval(const ModelParams& th) const {
  if (!(th.alpha > 0.0 && th.alpha <= 1.0)) return -kInf;
  if (!refresh_transform(th.beta0, th.beta1, th.shape)) return -kInf;

  const double alpha = th.alpha;
  const double inva = 1.0 / alpha;
  const double c = (1.0 - alpha) * inva;

  q = (lz * (-inva)).exp();

  double qc[2] = {0.0, 0.0};
  for (int t = 0; t < 2; ++t)
    if (period_present[t]) qc[t] = std::exp(-inva * lzc[t]);

  double total = censor_const + sum_marg + sum_j_pair +
                 (-inva - 1.0) * sum_lz_pair;

  const double* qd = q.data();
  if (!both_a.empty()) {
    double* o = bq.data();
    for (std::size_t m = 0; m < both_a.size(); ++m)
      o[m] = qd[both_a[m]] + qd[both_b[m]];
    bl = bq.log();
    bv = (alpha * bl).exp();
    total += (-bv + (alpha - 2.0) * bl + (bv + c).log()).sum();
  }
  if (!one_idx.empty()) {
    double* o = ob.data();
    double q0 = qc[0], dq = qc[1] - qc[0];
    const double* cm = one_c01.data();
    for (std::size_t m = 0; m < one_idx.size(); ++m)
      o[m] = qd[one_idx[m]] + (q0 + dq * cm[m]);
    ol = ob.log();
    ov = (alpha * ol).exp();
    total += (-ov + (alpha - 1.0) * ol).sum();
  }
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      if (n_neither[a][b] > 0)
        total += static_cast<double>(n_neither[a][b]) *
                 (-std::exp(alpha * std::log(qc[a] + qc[b])));

  return std::isnan(total) ? -kInf : total;
}

MarkovLikelihood::MarkovLikelihood(const PreparedSeries& s)
    : impl_(std::make_unique<Impl>(s)) {}
MarkovLikelihood::~MarkovLikelihood() = default;
MarkovLikelihood::MarkovLikelihood(MarkovLikelihood&&) noexcept = default;
MarkovLikelihood& MarkovLikelihood::operator=(MarkovLikelihood&&) noexcept =
    default;

double MarkovLikelihood::operator()(const ModelParams& theta) const {
  return impl_->eval(theta);
}

double loglik_markov(const ModelParams& theta, const PreparedSeries& s) {
  return MarkovLikelihood(s)(theta);
}

double log_prior(const ModelParams& theta, const PriorSpec& p) {
  if (!(theta.alpha > 0.0 && theta.alpha <= 1.0)) return -kInf;
  return normal_logpdf(theta.beta0, p.beta0) +
         normal_logpdf(theta.beta1, p.beta1) +
         normal_logpdf(theta.shape, p.shape);
}

double log_posterior(const ModelParams& theta, const PreparedSeries& s,
                     const PriorSpec& p, FitMode mode, std::size_t run_length) {
  double lp = log_prior(theta, p);
  if (lp == -kInf) return -kInf;
  switch (mode) {
    case FitMode::ignore_dependence:
      return lp + loglik_independent(theta.beta0, theta.beta1, theta.shape, s);
    case FitMode::decluster:
      return lp + loglik_declustered(theta.beta0, theta.beta1, theta.shape,
                                     peak_excesses(s, run_length));
    case FitMode::markov:
      return lp + loglik_markov(theta, s);
  }
  throw std::invalid_argument("unknown fit mode");
}

}  // namespace petx
