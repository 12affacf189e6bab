#ifndef PETX_IO_HPP
#define PETX_IO_HPP

#include <array>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "petx/pipeline.hpp"
#include "petx/simulate.hpp"
#include "petx/threshold.hpp"

// File formats and report emission: PET observation CSV, study configuration
// files, the report tables (summary, caterpillar, mean residual life), run
// metadata, and self-contained SVG renderings of the plot tables. All output
// is deterministic: fixed column order, fixed numeric formatting, no
// timestamps or environment-dependent content.

namespace petx {

inline constexpr const char* kVersion = "0.1.0";

// Input that violates a format or range rule. Messages name the offending
// file and line where applicable. Distinguished from std::runtime_error so
// the command line can map it to its own exit code.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// --- observation CSV ------------------------------------------------------

// Header required on the first line, byte for byte.
inline constexpr const char* kPetCsvHeader =
    "site_id,date,interval_start,pet_seconds,period,treated";

// Parses an observation table. Rows are grouped into one SiteRecord per
// site id (sites sorted by id, rows by date then interval). An empty
// pet_seconds field marks an interval with no conflict; it is kept as a
// NaN observation so gaps in the day are explicit. Throws ValidationError
// with the line number on any malformed or duplicate row. The stream
// overload takes a name used only in error messages.
std::vector<SiteRecord> ingest_csv(std::istream& in, const std::string& name);
std::vector<SiteRecord> ingest_csv(const std::string& path);

// Writes site records in the same schema ingest_csv reads. pet_seconds is
// printed in shortest round-trip form, so ingesting the file again
// reproduces every value exactly. Missing intervals become empty fields.
void write_pet_csv(std::span<const SiteRecord> sites, const std::string& path);

// --- configuration --------------------------------------------------------

// Parses a study configuration: an INI-style file with sections [study]
// (mode, kappa), [priors] (beta0_mean, beta0_variance, beta1_mean,
// beta1_variance, shape_mean, shape_variance), [mcmc] (retained_draws, thin,
// burn_in, seed, pilot_iterations, target_acceptance), and [sites] (one
// `id = threshold` entry per site). Every key is optional except that a fit
// needs a threshold per site; unknown sections or keys are errors with line
// numbers, as are out-of-range values. Lines starting with '#' or ';' are
// comments.
StudyConfig load_config(std::istream& in, const std::string& name);
StudyConfig load_config(const std::string& path);

// 64-bit FNV-1a of a byte string, as 16 lowercase hex digits. Used to stamp
// the configuration contents into run metadata.
std::string fnv1a_hex(std::string_view bytes);

// --- report emission ------------------------------------------------------

// Fixed-precision numeric cell: 6 significant digits ("%.6g"). Non-finite
// values render as an empty string so no NaN or Inf reaches an output file.
std::string format_g6(double v);

// Writes summary.csv, caterpillar.csv, and run_meta.json into out_dir, plus
// caterpillar.svg when with_svg is set. summary.csv has one row per sampled
// parameter per site (four in markov mode, three otherwise) with columns
// site,mode,parameter,mean,lo95,hi95,threshold. Throws std::runtime_error
// if a file cannot be created.
void emit_report(const StudyReport& r, const std::string& out_dir,
                 bool with_svg);

// Mean-residual-life table and plot for one site.
// CSV columns: threshold,mean_excess,n_excess,ci_halfwidth.
void write_mrl_csv(std::span<const MrlPoint> curve, const std::string& path);
void write_mrl_svg(std::span<const MrlPoint> curve, const std::string& path,
                   const std::string& title);

// Caterpillar plot of the period-coefficient intervals across sites.
void write_caterpillar_svg(std::span<const CatRow> rows,
                           const std::string& path);

// Readers for re-rendering plots from previously emitted tables. Empty
// numeric cells come back as NaN.
std::vector<CatRow> read_caterpillar_csv(const std::string& path);
std::vector<MrlPoint> read_mrl_csv(const std::string& path);

// --- synthetic data -------------------------------------------------------

// ISO date arithmetic (Gregorian, proleptic). days may be negative.
std::string add_days(const std::string& iso_date, int days);

// Simulates a site and lays the values out as dated 10-minute intervals:
// each period starts at its start date, each day holds spec.day_length
// consecutive intervals from 08:00. Requires day_length in [1,72]. The
// PET values are the negated simulated series; if a parameter choice pushes
// any outside (0,15), throws ValidationError citing the bound. Preparing
// the returned record reproduces simulate_series(spec) exactly, so a
// write/ingest round trip is lossless.
SiteRecord synthesize_site(const SimSpec& spec, const std::string& site_id,
                           bool treated,
                           const std::array<std::string, 2>& start_dates);

}  // namespace petx

#endif  // PETX_IO_HPP
