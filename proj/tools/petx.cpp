// Command-line driver: threshold diagnostics, model fitting, synthetic data
// generation, extremal-index lookup, and report re-rendering for
// before/after PET conflict studies.
//
// Exit codes: 0 success, 1 invalid input or arguments, 2 runtime failure.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <span>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include <CLI11.hpp>

#include "petx/io.hpp"
#include "petx/pipeline.hpp"
#include "petx/simulate.hpp"
#include "petx/threshold.hpp"

namespace {

std::string read_file_or_fail(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw petx::ValidationError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return std::move(buf).str();
}

std::string safe_filename(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    bool ok = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') ||
              (c >= '0' && c <= '9') || c == '.' || c == '_' || c == '-';
    out += ok ? c : '_';
  }
  return out.empty() ? std::string("_") : out;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
}

// Negated PET values of one site's conflict intervals, the scale the model
// works on.
std::vector<double> negated_values(const petx::SiteRecord& site) {
  std::vector<double> v;
  v.reserve(site.obs.size());
  for (const auto& o : site.obs)
    if (!std::isnan(o.pet)) v.push_back(-o.pet);
  return v;
}

struct GlobalArgs {
  std::string config_path;
  std::string out_dir = ".";
  std::string mode_str;
  std::uint64_t seed = 0;
  bool has_seed = false;
};

void cmd_mrl(const GlobalArgs& g, const std::string& data_path,
             const std::vector<std::string>& wanted, std::size_t points,
             bool svg) {
  auto sites = petx::ingest_csv(data_path);
  ensure_dir(g.out_dir);

  auto emit_one = [&](const petx::SiteRecord& site) {
    auto values = negated_values(site);
    if (values.size() < 2)
      throw petx::ValidationError("site " + site.site_id +
                                  " has fewer than 2 conflict intervals");
    auto grid = petx::default_mrl_grid(values, points);
    auto curve = petx::mrl_curve(values, grid);
    std::string stem = g.out_dir + "/mrl_" + safe_filename(site.site_id);
    petx::write_mrl_csv(curve, stem + ".csv");
    if (svg) petx::write_mrl_svg(curve, stem + ".svg", site.site_id);
    std::cerr << "wrote " << stem << ".csv (" << values.size()
              << " conflict intervals)\n";
  };

  if (wanted.empty()) {
    for (const auto& site : sites) emit_one(site);
    return;
  }
  for (const auto& id : wanted) {
    auto it = std::find_if(sites.begin(), sites.end(),
                           [&](const auto& s) { return s.site_id == id; });
    if (it == sites.end())
      throw petx::ValidationError("site " + id + " not present in " +
                                  data_path);
    emit_one(*it);
  }
}

void cmd_fit(const GlobalArgs& g, const std::string& data_path, bool svg,
             std::uint64_t draws) {
  if (g.config_path.empty())
    throw petx::ValidationError("fit requires --config");
  std::string config_bytes = read_file_or_fail(g.config_path);
  std::istringstream cfg_in(config_bytes);
  petx::StudyConfig cfg = petx::load_config(cfg_in, g.config_path);

  if (!g.mode_str.empty()) cfg.mode = petx::parse_mode(g.mode_str);
  if (g.has_seed) cfg.mcmc.seed = g.seed;
  if (draws > 0) cfg.mcmc.retained_draws = static_cast<std::size_t>(draws);

  auto sites = petx::ingest_csv(data_path);
  std::cerr << "fitting " << sites.size() << " site(s), mode "
            << petx::mode_name(cfg.mode) << ", " << cfg.mcmc.retained_draws
            << " retained draws (thin " << cfg.mcmc.thin << ")\n";

  petx::StudyReport report = petx::run_study(sites, cfg);
  report.meta.command = "fit";
  report.meta.config_hash = petx::fnv1a_hex(config_bytes);
  report.meta.seed = cfg.mcmc.seed;
  report.meta.mode = cfg.mode;
  report.meta.run_length = cfg.run_length;

  petx::emit_report(report, g.out_dir, svg);
  std::cerr << "wrote summary.csv, caterpillar.csv, run_meta.json"
            << (svg ? ", caterpillar.svg" : "") << " in " << g.out_dir
            << '\n';
}

void cmd_simulate(const GlobalArgs& g, const petx::SimSpec& spec,
                  const std::string& site_id, bool treated,
                  const std::array<std::string, 2>& starts) {
  if (!(spec.theta.alpha > 0.0 && spec.theta.alpha <= 1.0))
    throw petx::ValidationError("alpha must be in (0,1]");
  for (double r : spec.exceed_rate)
    if (!(r > 0.0 && r < 1.0))
      throw petx::ValidationError("exceedance rates must be in (0,1)");

  petx::SiteRecord rec =
      petx::synthesize_site(spec, site_id, treated, starts);
  ensure_dir(g.out_dir);
  std::string path = g.out_dir + "/pet.csv";
  petx::write_pet_csv(std::span(&rec, 1), path);
  std::cerr << "wrote " << path << " (" << rec.obs.size()
            << " intervals, seed " << spec.seed << ")\n";
}

void cmd_theta(const GlobalArgs& g, double alpha, std::size_t n, double level,
               std::size_t kappa) {
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw petx::ValidationError("alpha must be in (0,1]");
  double th = g.has_seed
                  ? petx::theta_from_alpha(alpha, n, level, kappa, g.seed)
                  : petx::theta_from_alpha(alpha, n, level, kappa);
  std::printf("%.6g\n", th);
}

void cmd_report(const GlobalArgs& g, const std::string& from) {
  namespace fs = std::filesystem;
  const std::string dir = from.empty() ? g.out_dir : from;
  bool rendered = false;

  if (fs::exists(dir + "/caterpillar.csv")) {
    auto rows = petx::read_caterpillar_csv(dir + "/caterpillar.csv");
    petx::write_caterpillar_svg(rows, dir + "/caterpillar.svg");
    std::cerr << "wrote " << dir << "/caterpillar.svg\n";
    rendered = true;
  }

  std::vector<std::string> mrl_files;
  if (fs::is_directory(dir)) {
    for (const auto& e : fs::directory_iterator(dir)) {
      std::string name = e.path().filename().string();
      if (name.starts_with("mrl_") && name.ends_with(".csv"))
        mrl_files.push_back(name);
    }
  }
  std::sort(mrl_files.begin(), mrl_files.end());
  for (const auto& name : mrl_files) {
    std::string stem = name.substr(0, name.size() - 4);
    std::string site = stem.substr(4);
    auto curve = petx::read_mrl_csv(dir + "/" + name);
    petx::write_mrl_svg(curve, dir + "/" + stem + ".svg", site);
    std::cerr << "wrote " << dir << "/" << stem << ".svg\n";
    rendered = true;
  }

  if (!rendered)
    throw petx::ValidationError("no caterpillar.csv or mrl_*.csv in " + dir);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Threshold-exceedance before/after analysis of traffic-conflict PET "
      "series"};
  app.set_version_flag("--version", std::string("petx ") + petx::kVersion);
  app.require_subcommand(1);

  GlobalArgs g;
  app.add_option("--config", g.config_path, "Study configuration file");
  app.add_option("--out", g.out_dir, "Output directory (default: .)");
  app.add_option("--mode", g.mode_str,
                 "Analysis mode override: ignore, decluster, or markov");
  auto* seed_opt =
      app.add_option("--seed", g.seed, "Random seed override");

  // mrl
  std::string mrl_data;
  std::vector<std::string> mrl_sites;
  std::size_t mrl_points = 200;
  bool mrl_svg = false;
  auto* mrl = app.add_subcommand(
      "mrl", "Mean-residual-life curves for threshold choice");
  mrl->fallthrough();
  mrl->add_option("--data", mrl_data, "PET observation CSV")->required();
  mrl->add_option("--site", mrl_sites,
                  "Site id to include (repeatable; default: all)");
  mrl->add_option("--points", mrl_points, "Grid size (default: 200)")
      ->check(CLI::Range(std::size_t(2), std::size_t(100000)));
  mrl->add_flag("--svg", mrl_svg, "Also render SVG plots");

  // fit
  std::string fit_data;
  bool fit_svg = false;
  std::uint64_t fit_draws = 0;
  auto* fit = app.add_subcommand("fit", "Fit the study and emit the report");
  fit->fallthrough();
  fit->add_option("--data", fit_data, "PET observation CSV")->required();
  fit->add_flag("--svg", fit_svg, "Also render the caterpillar plot");
  fit->add_option("--draws", fit_draws,
                  "Override the number of retained draws");

  // simulate
  petx::SimSpec spec;
  spec.n_per_period = {2160, 2160};
  spec.theta = {0.0, 0.0, -0.25, 0.5};
  spec.threshold = -6.0;
  spec.exceed_rate = {0.1, 0.1};
  std::string sim_site = "SIM1";
  int sim_treated = 1;
  std::array<std::string, 2> sim_starts = {"2018-03-01", "2018-08-01"};
  auto* sim = app.add_subcommand(
      "simulate", "Generate a synthetic observation CSV from the model");
  sim->fallthrough();
  sim->add_option("--n-before", spec.n_per_period[0],
                  "Intervals in the before period (default: 2160)");
  sim->add_option("--n-after", spec.n_per_period[1],
                  "Intervals in the after period (default: 2160)");
  sim->add_option("--alpha", spec.theta.alpha,
                  "Logistic dependence parameter in (0,1] (default: 0.5)");
  sim->add_option("--beta0", spec.theta.beta0,
                  "Log GPD scale, before period (default: 0)");
  sim->add_option("--beta1", spec.theta.beta1,
                  "Log-scale change in the after period (default: 0)");
  sim->add_option("--shape", spec.theta.shape,
                  "GPD shape (default: -0.25)");
  sim->add_option("--threshold", spec.threshold,
                  "Threshold on the negated-PET scale (default: -6)");
  sim->add_option("--rate-before", spec.exceed_rate[0],
                  "Exceedance rate, before period (default: 0.1)");
  sim->add_option("--rate-after", spec.exceed_rate[1],
                  "Exceedance rate, after period (default: 0.1)");
  sim->add_option("--day-length", spec.day_length,
                  "Intervals per day, 1-72 (default: 72)");
  sim->add_option("--site", sim_site, "Site id (default: SIM1)");
  sim->add_option("--treated", sim_treated, "Treated flag 0/1 (default: 1)")
      ->check(CLI::Range(0, 1));
  sim->add_option("--start-before", sim_starts[0],
                  "First date of the before period (default: 2018-03-01)");
  sim->add_option("--start-after", sim_starts[1],
                  "First date of the after period (default: 2018-08-01)");

  // theta
  double th_alpha = 0.0;
  std::size_t th_n = 1000000;
  double th_level = 0.999;
  std::size_t th_kappa = 10;
  auto* th = app.add_subcommand(
      "theta", "Extremal index of the dependence parameter, by simulation");
  th->fallthrough();
  th->add_option("--alpha", th_alpha, "Dependence parameter in (0,1]")
      ->required();
  th->add_option("--n", th_n, "Simulated chain length (default: 1e6)");
  th->add_option("--level", th_level,
                 "Quantile level for the runs estimator (default: 0.999)");
  th->add_option("--kappa", th_kappa, "Run length (default: 10)");

  // report
  std::string rep_from;
  auto* rep = app.add_subcommand(
      "report", "Re-render SVG plots from previously emitted tables");
  rep->fallthrough();
  rep->add_option("--from", rep_from,
                  "Directory holding the tables (default: --out)");

  try {
    app.parse(argc, argv);
    g.has_seed = seed_opt->count() > 0;

    if (mrl->parsed()) {
      cmd_mrl(g, mrl_data, mrl_sites, mrl_points, mrl_svg);
    } else if (fit->parsed()) {
      cmd_fit(g, fit_data, fit_svg, fit_draws);
    } else if (sim->parsed()) {
      if (g.has_seed) spec.seed = g.seed;
      cmd_simulate(g, spec, sim_site, sim_treated != 0, sim_starts);
    } else if (th->parsed()) {
      cmd_theta(g, th_alpha, th_n, th_level, th_kappa);
    } else if (rep->parsed()) {
      cmd_report(g, rep_from);
    }
    return 0;
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  } catch (const petx::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
