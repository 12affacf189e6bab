#ifndef PETX_PIPELINE_HPP
#define PETX_PIPELINE_HPP

#include <array>
#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "petx/likelihood.hpp"
#include "petx/mcmc.hpp"

// Study orchestration: turns raw per-site observation tables into prepared
// series, runs the configured analysis mode per site, classifies the
// treatment effect from the period coefficient, and assembles cross-site
// report tables. Sites use RNG streams derived from (master seed, site id),
// so per-site results do not depend on processing order.

namespace petx {

// One 10-minute interval observation. pet is NaN for intervals recorded
// without a conflict (missing), which only contribute break structure.
struct RawObs {
  std::string date;  // ISO yyyy-mm-dd
  int slot;          // 10-minute interval index within 08:00-19:50, 0..71
  double pet;        // seconds, in (0,15); NaN if missing
  int period;        // 0 before, 1 after
};

struct SiteRecord {
  std::string site_id;
  bool treated = false;
  double threshold = std::numeric_limits<double>::quiet_NaN();
  std::vector<RawObs> obs;  // sorted by (date, slot)
};

enum class Verdict { effective, inconclusive, adverse };

struct SiteResult {
  std::string site_id;
  bool treated = false;
  FitMode mode = FitMode::markov;
  double threshold = 0.0;
  PosteriorSummary summary{};
  Verdict verdict = Verdict::inconclusive;
  std::array<std::size_t, 2> n_obs{0, 0};
  std::array<std::size_t, 2> n_exceed{0, 0};
  double theta_hat = std::numeric_limits<double>::quiet_NaN();  // markov only
  std::array<double, 4> proposal_sd{};
  std::array<double, 4> acceptance{};
};

// One caterpillar-plot row: the period coefficient's posterior mean and 95%
// interval for a site/mode.
struct CatRow {
  std::string site_id;
  bool treated;
  FitMode mode;
  double mean;
  double lo;
  double hi;
};

struct StudyConfig {
  FitMode mode = FitMode::markov;
  std::size_t run_length = 10;  // declustering run length
  PriorSpec priors;
  McmcConfig mcmc;
  std::map<std::string, double> thresholds;  // per site id
};

struct RunMeta {
  std::string command;
  std::string config_hash;
  std::uint64_t seed = 0;
  FitMode mode = FitMode::markov;
  std::size_t run_length = 10;
};

struct StudyReport {
  RunMeta meta;
  std::vector<SiteResult> results;
  std::vector<CatRow> caterpillar;
};

// Negates the PET values, assigns periods, flags breaks at day boundaries,
// missing or absent intervals, and the period boundary, and computes the
// empirical exceedance rates against r.threshold. Throws on PET outside
// (0,15), on an empty period, on a missing threshold, and on period order
// violations.
PreparedSeries prepare_site(const SiteRecord& r);

// Fits one site in one mode: pilot-tunes the proposal scales, samples the
// posterior, summarizes, and classifies the treatment. In markov mode the
// extremal index is estimated at the posterior mean of alpha. Identity
// fields (site_id, treated) are left for the caller.
SiteResult run_site(const PreparedSeries& s, FitMode mode,
                    const PriorSpec& priors, const McmcConfig& cfg,
                    std::size_t run_length);

// effective when the 97.5% quantile is below 0, adverse when the 2.5%
// quantile is above 0, inconclusive otherwise.
Verdict classify_treatment(const ParamSummary& beta1);

// Caterpillar rows (the period coefficient per site/mode), in input order.
std::vector<CatRow> caterpillar_data(std::span<const SiteResult> results);

// Runs every site in cfg.mode with per-site thresholds from cfg.thresholds
// (an unlisted site is an error) and seeds derived from cfg.mcmc.seed and
// the site id.
StudyReport run_study(std::span<const SiteRecord> sites,
                      const StudyConfig& cfg);

const char* mode_name(FitMode m);
FitMode parse_mode(const std::string& name);

}  // namespace petx

#endif  // PETX_PIPELINE_HPP
