#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

#include <doctest.h>

#include "oracles.hpp"
#include "petx/evd.hpp"

using namespace petx;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

TEST_SUITE("evd") {

TEST_CASE("gpd_cdf matches hand values and direct formula") {
  CHECK(gpd_cdf(1.0, {1.0, 0.0}) == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-12));
  CHECK(gpd_cdf(1.0, {1.0, 0.2}) == doctest::Approx(0.5981224279835391).epsilon(1e-12));
  CHECK(gpd_cdf(0.0, {2.0, 0.5}) == 0.0);
  CHECK(gpd_cdf(-1.0, {2.0, 0.5}) == 0.0);
  CHECK(gpd_cdf(10.0, {1.0, -0.2}) == 1.0);  // upper endpoint at 5
  CHECK_THROWS_AS(gpd_cdf(1.0, {0.0, 0.2}), std::invalid_argument);

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> uy(0.0, 8.0), us(0.2, 3.0),
      ux(-0.45, 1.0);
  for (int i = 0; i < 500; ++i) {
    double y = uy(rng), s = us(rng), xi = ux(rng);
    double got = gpd_cdf(y, {s, xi});
    CHECK(got == doctest::Approx(oracle::gpd_cdf(y, s, xi)).epsilon(1e-12));
    CHECK(got >= 0.0);
    CHECK(got <= 1.0);
    CHECK(gpd_cdf(y + 0.5, {s, xi}) >= got);
  }
}

TEST_CASE("gpd_logpdf matches hand values and direct formula") {
  CHECK(gpd_logpdf(0.0, {2.0, 0.0}) == doctest::Approx(std::log(0.5)).epsilon(1e-12));
  CHECK(gpd_logpdf(1.0, {1.0, 0.2}) ==
        doctest::Approx(-6.0 * std::log(1.2)).epsilon(1e-12));
  CHECK(gpd_logpdf(10.0, {1.0, -0.2}) == -kInf);

  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> uy(0.0, 6.0), us(0.2, 3.0),
      ux(-0.45, 1.0);
  for (int i = 0; i < 500; ++i) {
    double y = uy(rng), s = us(rng), xi = ux(rng);
    double ref = oracle::gpd_pdf(y, s, xi);
    if (ref == 0.0) {
      CHECK(gpd_logpdf(y, {s, xi}) == -kInf);
    } else {
      CHECK(std::exp(gpd_logpdf(y, {s, xi})) ==
            doctest::Approx(ref).epsilon(1e-11));
    }
  }
}

TEST_CASE("gpd_quantile inverts the cdf") {
  CHECK(gpd_quantile(0.0, {1.0, 0.3}) == 0.0);
  CHECK(gpd_quantile(1.0 - std::exp(-1.0), {1.0, 0.0}) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(gpd_quantile(0.5981224279835391, {1.0, 0.2}) ==
        doctest::Approx(1.0).epsilon(1e-10));
  CHECK_THROWS_AS(gpd_quantile(1.0, {1.0, 0.2}), std::domain_error);
  CHECK_THROWS_AS(gpd_quantile(-0.1, {1.0, 0.2}), std::domain_error);

  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> up(0.0, 0.999), us(0.2, 3.0),
      ux(-0.45, 1.0);
  for (int i = 0; i < 1000; ++i) {
    double p = up(rng);
    GpdParams g{us(rng), ux(rng)};
    double y = gpd_quantile(p, g);
    CHECK(gpd_cdf(y, g) == doctest::Approx(p).epsilon(1e-10));
  }
}

TEST_CASE("gpd kernels are continuous across shape zero") {
  GpdParams at0{1.3, 0.0}, plus{1.3, 1e-9}, minus{1.3, -1e-9};
  for (double y : {0.1, 0.5, 1.0, 2.0, 5.0, 9.0}) {
    CHECK(std::abs(gpd_cdf(y, plus) - gpd_cdf(y, at0)) < 1e-6);
    CHECK(std::abs(gpd_cdf(y, minus) - gpd_cdf(y, at0)) < 1e-6);
    CHECK(std::abs(gpd_logpdf(y, plus) - gpd_logpdf(y, at0)) < 1e-6);
    CHECK(std::abs(gpd_logpdf(y, minus) - gpd_logpdf(y, at0)) < 1e-6);
  }
  for (double p : {0.05, 0.3, 0.7, 0.95, 0.999}) {
    CHECK(std::abs(gpd_quantile(p, plus) - gpd_quantile(p, at0)) < 1e-6);
    CHECK(std::abs(gpd_quantile(p, minus) - gpd_quantile(p, at0)) < 1e-6);
  }
}

TEST_CASE("gev_cdf matches hand values, limits, and support edges") {
  CHECK(gev_cdf(0.5, {0.5, 1.0, 0.0}) ==
        doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
  CHECK(gev_cdf(1.5, {0.5, 1.0, 0.0}) ==
        doctest::Approx(std::exp(-std::exp(-1.0))).epsilon(1e-12));

  for (double y : {-2.0, -0.5, 0.0, 0.7, 3.0}) {
    double f0 = gev_cdf(y, {0.1, 1.2, 0.0});
    CHECK(std::abs(gev_cdf(y, {0.1, 1.2, 1e-9}) - f0) < 1e-6);
    CHECK(std::abs(gev_cdf(y, {0.1, 1.2, -1e-9}) - f0) < 1e-6);
  }

  // Bounded below for positive shape, bounded above for negative shape.
  CHECK(gev_cdf(-10.0, {0.0, 1.0, 0.5}) == 0.0);
  CHECK(gev_cdf(10.0, {0.0, 1.0, -0.5}) == 1.0);

  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> uy(-4.0, 6.0);
  for (int i = 0; i < 200; ++i) {
    double a = uy(rng), b = uy(rng);
    if (a > b) std::swap(a, b);
    GevParams g{0.3, 0.9, -0.2};
    CHECK(gev_cdf(a, g) <= gev_cdf(b, g));
    CHECK(gev_cdf(a, g) >= 0.0);
    CHECK(gev_cdf(b, g) <= 1.0);
  }
}

TEST_CASE("gev_to_gpd_scale") {
  CHECK(gev_to_gpd_scale({7.0, 1.0, 0.0}, 3.0) == doctest::Approx(1.0));
  CHECK(gev_to_gpd_scale({0.0, 1.0, 0.5}, 2.0) == doctest::Approx(2.0));
  CHECK_THROWS_AS(gev_to_gpd_scale({0.0, 1.0, -0.5}, 3.0),
                  std::invalid_argument);
}

TEST_CASE("to_frechet matches the semiparametric transform") {
  // exceed_rate 0.1, shape 0, unit scale, one unit above the threshold.
  ThresholdModel tm{-6.0, 0.1, {1.0, 0.0}};
  double ft = 1.0 - 0.1 * std::exp(-1.0);
  CHECK(ft == doctest::Approx(0.963212).epsilon(1e-6));
  double z = to_frechet(-5.0, tm);
  CHECK(z == doctest::Approx(-1.0 / std::log(ft)).epsilon(1e-13));
  CHECK(z == doctest::Approx(26.679).epsilon(1e-4));

  // Rate 1 pushes the transform to 0 just above the threshold; the approach
  // is logarithmic in the offset.
  ThresholdModel full{-6.0, 1.0, {1.0, 0.0}};
  double znear = to_frechet(-6.0 + 1e-9, full);
  CHECK(znear > 0.0);
  CHECK(znear < 0.06);
  CHECK(to_frechet(-6.0 + 1e-12, full) < znear);
  CHECK(znear < to_frechet(-6.0 + 1e-6, full));

  CHECK_THROWS_AS(to_frechet(-6.0, tm), std::domain_error);
  CHECK_THROWS_AS(to_frechet(-7.0, tm), std::domain_error);

  // Beyond a bounded upper endpoint the image is infinite.
  ThresholdModel bounded{0.0, 0.2, {1.0, -0.5}};
  CHECK(to_frechet(3.0, bounded) == kInf);

  std::mt19937_64 rng(15);
  std::uniform_real_distribution<double> ul(0.02, 0.9), us(0.3, 2.5),
      ux(-0.4, 0.8), ue(0.0, 1.0);
  for (int i = 0; i < 500; ++i) {
    ThresholdModel m{1.5, ul(rng), {us(rng), ux(rng)}};
    double ymax = m.gpd.shape < 0 ? -m.gpd.scale / m.gpd.shape : 4.0;
    double x1 = m.threshold + ue(rng) * 0.9 * ymax;
    double x2 = m.threshold + ue(rng) * 0.9 * ymax;
    if (x1 == m.threshold || x2 == m.threshold) continue;
    double z1 = to_frechet(x1, m);
    double ref = oracle::to_frechet(x1, m.threshold, m.exceed_rate,
                                    m.gpd.scale, m.gpd.shape);
    if (std::isinf(ref)) {
      CHECK(z1 == ref);
    } else {
      CHECK(z1 == doctest::Approx(ref).epsilon(1e-10));
    }
    // Order preservation.
    double z2 = to_frechet(x2, m);
    if (x1 < x2) CHECK(z1 < z2);
    if (x2 < x1) CHECK(z2 < z1);
  }
}

TEST_CASE("frechet_censor_point") {
  ThresholdModel tm{0.0, 1.0 - std::exp(-1.0), {1.0, 0.0}};
  CHECK(frechet_censor_point(tm) == doctest::Approx(1.0).epsilon(1e-12));
  tm.exceed_rate = 0.1;
  CHECK(frechet_censor_point(tm) == doctest::Approx(9.4912).epsilon(1e-5));
  tm.exceed_rate = 1e-9;
  CHECK(frechet_censor_point(tm) > 1e8);
  tm.exceed_rate = 1.0;
  CHECK_THROWS_AS(frechet_censor_point(tm), std::invalid_argument);
  tm.exceed_rate = 0.0;
  CHECK_THROWS_AS(frechet_censor_point(tm), std::invalid_argument);
}

TEST_CASE("logistic_cdf: hand values, limits, and direct formula") {
  CHECK(logistic_cdf(1.0, 1.0, 1.0) ==
        doctest::Approx(std::exp(-2.0)).epsilon(1e-12));
  CHECK(logistic_cdf(1.0, 1.0, 0.5) ==
        doctest::Approx(std::exp(-std::sqrt(2.0))).epsilon(1e-12));
  // Perfect-dependence limit: G -> exp(-1/min(z1,z2)).
  CHECK(logistic_cdf(1.0, 2.0, 0.001) ==
        doctest::Approx(std::exp(-1.0)).epsilon(1e-9));
  CHECK_THROWS_AS(logistic_cdf(1.0, 1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(logistic_cdf(1.0, 1.0, 1.2), std::invalid_argument);
  CHECK_THROWS_AS(logistic_cdf(0.0, 1.0, 0.5), std::domain_error);

  std::mt19937_64 rng(16);
  std::uniform_real_distribution<double> uz(0.05, 50.0), ua(0.05, 1.0);
  for (int i = 0; i < 500; ++i) {
    double z1 = uz(rng), z2 = uz(rng), a = ua(rng);
    double got = logistic_cdf(z1, z2, a);
    CHECK(got == doctest::Approx(oracle::logistic_G(z1, z2, a)).epsilon(1e-10));
    CHECK(got >= 0.0);
    CHECK(got <= 1.0);
    CHECK(logistic_cdf(z1 + 1.0, z2, a) >= got);
    CHECK(std::exp(logistic_logcdf(z1, z2, a)) ==
          doctest::Approx(got).epsilon(1e-12));
  }
}

TEST_CASE("logistic_partial matches independence product and differences") {
  CHECK(logistic_partial(1.0, 1.0, 1.0) ==
        doctest::Approx(std::exp(-2.0)).epsilon(1e-12));

  auto fd_partial = [](double z1, double z2, double a) {
    auto g = [&](double t) { return oracle::logistic_G(t, z2, a); };
    return oracle::central_diff(g, z1, 1e-5 * z1);
  };
  CHECK(logistic_partial(1.0, 1.0, 0.5) ==
        doctest::Approx(fd_partial(1.0, 1.0, 0.5)).epsilon(1e-8));

  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> uz(0.2, 30.0), ua(0.08, 0.98);
  for (int i = 0; i < 300; ++i) {
    double z1 = uz(rng), z2 = uz(rng), a = ua(rng);
    double got = logistic_partial(z1, z2, a);
    CHECK(got == doctest::Approx(fd_partial(z1, z2, a)).epsilon(1e-6));
    CHECK(std::exp(logistic_logpartial(z1, z2, a)) ==
          doctest::Approx(got).epsilon(1e-12));
    // Exchangeability: the derivative in the second slot at swapped
    // arguments is the same number.
    auto g2 = [&](double t) { return oracle::logistic_G(z2, t, a); };
    CHECK(oracle::central_diff(g2, z1, 1e-5 * z1) ==
          doctest::Approx(got).epsilon(1e-6));
  }
}

TEST_CASE("logistic_density matches mixed differences and independence") {
  CHECK(logistic_density(1.0, 1.0, 1.0) ==
        doctest::Approx(std::exp(-2.0)).epsilon(1e-12));

  auto fd_density = [](double z1, double z2, double a) {
    auto g = [&](double s, double t) { return oracle::logistic_G(s, t, a); };
    return oracle::mixed_diff(g, z1, z2, 7e-4 * z1, 7e-4 * z2);
  };
  CHECK(logistic_density(1.0, 2.0, 0.5) ==
        doctest::Approx(fd_density(1.0, 2.0, 0.5)).epsilon(1e-7));

  std::mt19937_64 rng(18);
  std::uniform_real_distribution<double> uz(0.2, 30.0), ua(0.08, 0.98);
  for (int i = 0; i < 300; ++i) {
    double z1 = uz(rng), z2 = uz(rng), a = ua(rng);
    double got = logistic_density(z1, z2, a);
    CHECK(got == doctest::Approx(fd_density(z1, z2, a)).epsilon(3e-6));
    CHECK(std::exp(logistic_logdensity(z1, z2, a)) ==
          doctest::Approx(got).epsilon(1e-12));
  }
}

TEST_CASE("logistic_density integrates back to the distribution function") {
  // Simpson quadrature of the density over [0.1,100]^2 in log coordinates
  // must reproduce the rectangle probability of the distribution function.
  const double a = 0.1, b = 100.0, alpha = 0.65;
  const int n = 256;  // Simpson intervals per axis (even)
  const double la = std::log(a), lb = std::log(b), h = (lb - la) / n;
  auto wt = [&](int i) { return i == 0 || i == n ? 1.0 : (i % 2 ? 4.0 : 2.0); };
  double sum = 0.0;
  for (int i = 0; i <= n; ++i) {
    double w1 = la + i * h, z1 = std::exp(w1);
    double row = 0.0;
    for (int j = 0; j <= n; ++j) {
      double w2 = la + j * h, z2 = std::exp(w2);
      row += wt(j) * logistic_density(z1, z2, alpha) * z1 * z2;
    }
    sum += wt(i) * row;
  }
  sum *= h * h / 9.0;
  double rect = logistic_cdf(b, b, alpha) - 2.0 * logistic_cdf(b, a, alpha) +
                logistic_cdf(a, a, alpha);
  CHECK(sum == doctest::Approx(rect).epsilon(1e-4));
}

TEST_CASE("log-scale logistic kernels survive extreme magnitudes") {
  // Far tails where the plain forms would underflow to 0 or lose the log.
  double l1 = logistic_logcdf(1e-8, 2.0, 0.4);
  CHECK(std::isfinite(l1));
  CHECK(l1 < -1e7);  // G ~ exp(-1e8 * const)
  double l2 = logistic_logdensity(1e8, 1e8, 0.4);
  CHECK(std::isfinite(l2));
  double l3 = logistic_logpartial(1e8, 1e-8, 0.7);
  CHECK(std::isfinite(l3));
}

}  // TEST_SUITE
