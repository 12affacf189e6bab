#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <doctest.h>

#include "petx/io.hpp"
#include "petx/pipeline.hpp"
#include "petx/simulate.hpp"

using namespace petx;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

RawObs obs(const char* date, int slot, double pet, int period) {
  return RawObs{date, slot, pet, period};
}

SiteRecord basic_site(std::vector<RawObs> rows, double threshold = -6.0) {
  SiteRecord r;
  r.site_id = "S1";
  r.threshold = threshold;
  r.obs = std::move(rows);
  return r;
}

McmcConfig quick_mcmc(std::uint64_t seed) {
  McmcConfig cfg;
  cfg.retained_draws = 1500;
  cfg.thin = 2;
  cfg.burn_in = 300;
  cfg.pilot_iterations = 2000;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("prepare_site negates values and derives rates") {
  std::vector<RawObs> rows;
  for (int i = 0; i < 10; ++i)
    rows.push_back(obs("2018-03-01", i, i < 2 ? 3.2 : 8.0, 0));
  for (int i = 0; i < 4; ++i)
    rows.push_back(obs("2018-08-01", i, 7.5, 1));
  auto s = prepare_site(basic_site(std::move(rows)));

  REQUIRE(s.values.size() == 14);
  CHECK(s.values[0] == -3.2);
  CHECK(s.values[2] == -8.0);
  CHECK(s.n_period[0] == 10);
  CHECK(s.n_period[1] == 4);
  // Two of ten before-period values sit above the -6 threshold.
  CHECK(s.exceed_rate[0] == doctest::Approx(0.2));
  CHECK(s.exceed[0] == 1);
  CHECK(s.exceed[2] == 0);
}

TEST_CASE("prepare_site flags breaks at every chain interruption") {
  std::vector<RawObs> rows{
      obs("2018-03-01", 70, 4.0, 0),  // 0: first observation
      obs("2018-03-01", 71, 4.0, 0),  // 1: consecutive, no break
      obs("2018-03-02", 0, 4.0, 0),   // 2: 19:50 -> next-day 08:00
      obs("2018-03-02", 1, 4.0, 0),   // 3: consecutive
      obs("2018-03-02", 3, 4.0, 0),   // 4: absent interval 2
      obs("2018-03-02", 4, kNaN, 0),  //    recorded empty interval
      obs("2018-03-02", 5, 4.0, 0),   // 5: follows an empty interval
      obs("2018-08-01", 6, 4.0, 1),   // 6: period boundary
      obs("2018-08-01", 7, 4.0, 1),   // 7: consecutive
  };
  auto s = prepare_site(basic_site(std::move(rows)));

  REQUIRE(s.values.size() == 8);  // the empty interval carries no value
  std::array<std::uint8_t, 8> want{1, 0, 1, 0, 1, 1, 1, 0};
  for (std::size_t i = 0; i < want.size(); ++i)
    CHECK(s.break_before[i] == want[i]);
}

TEST_CASE("prepare_site rejects malformed sites") {
  auto ok = [](double pet) {
    return std::vector<RawObs>{obs("2018-03-01", 0, pet, 0),
                               obs("2018-08-01", 0, 5.0, 1)};
  };

  SiteRecord no_threshold = basic_site(ok(5.0));
  no_threshold.threshold = kNaN;
  CHECK_THROWS_AS(prepare_site(no_threshold), std::invalid_argument);

  SiteRecord unsorted = basic_site({obs("2018-03-02", 0, 5.0, 0),
                                    obs("2018-03-01", 0, 5.0, 0),
                                    obs("2018-08-01", 0, 5.0, 1)});
  CHECK_THROWS_AS(prepare_site(unsorted), std::invalid_argument);

  SiteRecord regress = basic_site({obs("2018-03-01", 0, 5.0, 1),
                                   obs("2018-08-01", 0, 5.0, 0)});
  CHECK_THROWS_AS(prepare_site(regress), std::invalid_argument);

  // Period order is enforced across empty intervals too.
  SiteRecord regress2 = basic_site({obs("2018-03-01", 0, kNaN, 1),
                                    obs("2018-08-01", 0, 5.0, 0)});
  CHECK_THROWS_AS(prepare_site(regress2), std::invalid_argument);

  CHECK_THROWS_WITH_AS(prepare_site(basic_site(ok(16.0))),
                       doctest::Contains("(0,15)"), std::invalid_argument);
  CHECK_THROWS_AS(prepare_site(basic_site(ok(0.0))), std::invalid_argument);
  CHECK_THROWS_AS(prepare_site(basic_site(ok(-1.0))), std::invalid_argument);

  SiteRecord one_period =
      basic_site({obs("2018-03-01", 0, 5.0, 0), obs("2018-03-01", 1, 5.0, 0)});
  CHECK_THROWS_AS(prepare_site(one_period), std::invalid_argument);

  SiteRecord bad_slot = basic_site({obs("2018-03-01", 72, 5.0, 0),
                                    obs("2018-08-01", 0, 5.0, 1)});
  CHECK_THROWS_AS(prepare_site(bad_slot), std::invalid_argument);
}

TEST_CASE("classify_treatment reproduces the published interval verdicts") {
  auto verdict = [](double lo, double hi) {
    return classify_treatment(ParamSummary{(lo + hi) / 2.0, 0.1, lo, hi});
  };
  CHECK(verdict(-0.4559, -0.2314) == Verdict::effective);
  CHECK(verdict(-0.1234, 0.0975) == Verdict::inconclusive);
  CHECK(verdict(-0.3139, -0.0926) == Verdict::effective);
  CHECK(verdict(0.0926, 0.3139) == Verdict::adverse);
  // The rule uses strict inequalities at zero.
  CHECK(verdict(-0.5, 0.0) == Verdict::inconclusive);
  CHECK(verdict(0.0, 0.5) == Verdict::inconclusive);
}

TEST_CASE("caterpillar_data copies the period coefficient in input order") {
  std::vector<SiteResult> results(3);
  const char* ids[3] = {"B", "A", "C"};
  for (int i = 0; i < 3; ++i) {
    results[i].site_id = ids[i];
    results[i].treated = i != 1;
    results[i].mode = FitMode::decluster;
    results[i].summary.param[1] = {-0.1 * i, 0.05, -0.2 * i, 0.1 * i};
  }
  auto rows = caterpillar_data(results);
  REQUIRE(rows.size() == 3);
  for (int i = 0; i < 3; ++i) {
    CHECK(rows[i].site_id == ids[i]);
    CHECK(rows[i].treated == (i != 1));
    CHECK(rows[i].mode == FitMode::decluster);
    CHECK(rows[i].mean == doctest::Approx(-0.1 * i));
    CHECK(rows[i].lo == doctest::Approx(-0.2 * i));
    CHECK(rows[i].hi == doctest::Approx(0.1 * i));
  }
}

TEST_CASE("run_site: null generating model is usually inconclusive") {
  int inconclusive = 0;
  for (int rep = 0; rep < 10; ++rep) {
    SimSpec spec;
    spec.n_per_period = {2000, 2000};
    spec.theta = {0.3, 0.0, -0.1, 1.0};
    spec.threshold = -6.0;
    spec.exceed_rate = {0.2, 0.2};
    spec.seed = 1000 + rep;
    auto s = simulate_series(spec);
    auto res = run_site(s, FitMode::ignore_dependence, PriorSpec{},
                        quick_mcmc(500 + rep), 10);
    inconclusive += res.verdict == Verdict::inconclusive;
  }
  CHECK(inconclusive >= 9);
}

TEST_CASE("run_site: a strong scale reduction is detected as effective") {
  SimSpec spec;
  spec.n_per_period = {3000, 3000};
  spec.theta = {0.4, -0.6, -0.1, 1.0};
  spec.threshold = -6.0;
  spec.exceed_rate = {0.25, 0.25};
  spec.seed = 77;
  auto s = simulate_series(spec);
  auto res = run_site(s, FitMode::ignore_dependence, PriorSpec{},
                      quick_mcmc(9), 10);
  CHECK(res.verdict == Verdict::effective);
  CHECK(res.summary.param[1].mean == doctest::Approx(-0.6).epsilon(0.35));
  CHECK(res.n_obs[0] == 3000);
  CHECK(res.n_obs[1] == 3000);
  CHECK(res.n_exceed[0] ==
        static_cast<std::size_t>(std::lround(s.exceed_rate[0] * 3000.0)));
  CHECK(std::isnan(res.theta_hat));       // not a markov fit
  CHECK(res.proposal_sd[3] == 0.0);       // alpha held
  CHECK(std::isnan(res.acceptance[3]));
}

TEST_CASE("run_site in markov mode estimates dependence and theta") {
  SimSpec spec;
  spec.n_per_period = {1500, 1500};
  spec.theta = {0.3, -0.2, -0.15, 0.5};
  spec.threshold = -6.0;
  spec.exceed_rate = {0.25, 0.25};
  spec.seed = 31;
  auto s = simulate_series(spec);
  auto res = run_site(s, FitMode::markov, PriorSpec{}, quick_mcmc(13), 10);

  CHECK(res.proposal_sd[3] > 0.0);
  CHECK(std::isfinite(res.acceptance[3]));
  CHECK(res.summary.param[3].mean > 0.0);
  CHECK(res.summary.param[3].mean < 1.0);
  CHECK(res.summary.param[3].mean == doctest::Approx(0.5).epsilon(0.4));
  CHECK(res.theta_hat > 0.0);
  CHECK(res.theta_hat <= 1.0);
  // Dependence at alpha near 0.5 clusters exceedances noticeably.
  CHECK(res.theta_hat < 0.9);
  CHECK(res.mode == FitMode::markov);
  CHECK(res.threshold == -6.0);
}

TEST_CASE("run_site in decluster mode holds alpha and skips theta") {
  SimSpec spec;
  spec.n_per_period = {1200, 1200};
  spec.theta = {0.3, -0.1, -0.1, 0.7};
  spec.threshold = -6.0;
  spec.exceed_rate = {0.2, 0.2};
  spec.seed = 55;
  auto s = simulate_series(spec);
  auto res = run_site(s, FitMode::decluster, PriorSpec{}, quick_mcmc(21), 5);
  CHECK(res.proposal_sd[3] == 0.0);
  CHECK(std::isnan(res.theta_hat));
  CHECK(res.verdict == classify_treatment(res.summary.param[1]));
}

TEST_CASE("run_study: results do not depend on site processing order") {
  SimSpec spec;
  spec.n_per_period = {600, 600};
  // Shape -0.25 bounds excesses by scale/0.25 < 6, keeping every simulated
  // value inside the valid PET range for the synthetic CSV layout.
  spec.theta = {0.3, -0.2, -0.25, 1.0};
  spec.threshold = -6.0;
  spec.exceed_rate = {0.25, 0.25};

  spec.seed = 1;
  auto a = synthesize_site(spec, "A01", true, {"2018-03-01", "2018-08-01"});
  spec.seed = 2;
  auto b = synthesize_site(spec, "B02", false, {"2018-03-01", "2018-08-01"});

  StudyConfig cfg;
  cfg.mode = FitMode::ignore_dependence;
  cfg.mcmc = quick_mcmc(424242);
  cfg.thresholds = {{"A01", -6.0}, {"B02", -6.0}};

  std::vector<SiteRecord> fwd{a, b}, rev{b, a};
  auto r1 = run_study(fwd, cfg);
  auto r2 = run_study(rev, cfg);
  REQUIRE(r1.results.size() == 2);
  REQUIRE(r2.results.size() == 2);

  for (const auto& lhs : r1.results) {
    const auto& rhs = lhs.site_id == r2.results[0].site_id ? r2.results[0]
                                                           : r2.results[1];
    CHECK(lhs.site_id == rhs.site_id);
    CHECK(lhs.treated == rhs.treated);
    CHECK(lhs.verdict == rhs.verdict);
    for (int j = 0; j < 4; ++j) {
      CHECK(lhs.summary.param[j].mean == rhs.summary.param[j].mean);
      CHECK(lhs.summary.param[j].q025 == rhs.summary.param[j].q025);
      CHECK(lhs.summary.param[j].q975 == rhs.summary.param[j].q975);
    }
  }

  CHECK(r1.caterpillar.size() == 2);
  CHECK(r1.caterpillar[0].site_id == "A01");
  CHECK(r1.meta.seed == 424242);
  CHECK(r1.meta.mode == FitMode::ignore_dependence);

  StudyConfig missing = cfg;
  missing.thresholds.erase("B02");
  CHECK_THROWS_AS(run_study(fwd, missing), std::invalid_argument);
}

TEST_CASE("mode names round-trip and reject unknown strings") {
  for (auto m : {FitMode::ignore_dependence, FitMode::decluster,
                 FitMode::markov})
    CHECK(parse_mode(mode_name(m)) == m);
  CHECK(std::string(mode_name(FitMode::markov)) == "markov");
  CHECK_THROWS_AS(parse_mode("bogus"), std::invalid_argument);
}

}  // TEST_SUITE
