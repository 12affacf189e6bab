#include "petx/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <sstream>
#include <string_view>
#include <string>
#include <system_error>
#include <utility>
#include <vector>

#include <json.hpp>

namespace petx {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

[[noreturn]] void fail_at(const std::string& name, std::size_t line,
                          const std::string& msg) {
  throw ValidationError(name + ":" + std::to_string(line) + ": " + msg);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

bool parse_double_strict(std::string_view s, double& out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [p, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && p == last && std::isfinite(out);
}

bool parse_u64(std::string_view s, std::uint64_t& out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [p, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && p == last;
}

bool all_digits(std::string_view s) {
  return !s.empty() &&
         std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

int days_in_month(int y, int m) {
  static const int base[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  bool leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
  return m == 2 && leap ? 29 : base[m - 1];
}

bool parse_date(std::string_view s, int& y, int& m, int& d) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
  if (!all_digits(s.substr(0, 4)) || !all_digits(s.substr(5, 2)) ||
      !all_digits(s.substr(8, 2)))
    return false;
  y = (s[0] - '0') * 1000 + (s[1] - '0') * 100 + (s[2] - '0') * 10 + (s[3] - '0');
  m = (s[5] - '0') * 10 + (s[6] - '0');
  d = (s[8] - '0') * 10 + (s[9] - '0');
  return m >= 1 && m <= 12 && d >= 1 && d <= days_in_month(y, m);
}

// HH:MM on the 10-minute grid between 08:00 and 19:50; returns the interval
// index 0..71, or -1 if malformed.
int parse_slot(std::string_view s) {
  if (s.size() != 5 || s[2] != ':') return -1;
  if (!all_digits(s.substr(0, 2)) || !all_digits(s.substr(3, 2))) return -1;
  int hh = (s[0] - '0') * 10 + (s[1] - '0');
  int mm = (s[3] - '0') * 10 + (s[4] - '0');
  if (hh < 8 || hh > 19 || mm % 10 != 0 || mm > 50) return -1;
  return (hh - 8) * 6 + mm / 10;
}

std::string slot_to_hhmm(int slot) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "%02d:%02d", 8 + slot / 6, (slot % 6) * 10);
  return buf;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot create " + path);
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return std::move(buf).str();
}

// Shortest decimal string that parses back to exactly v.
std::string shortest(double v) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

std::string xml_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

// --- observation CSV ------------------------------------------------------

std::vector<SiteRecord> ingest_csv(std::istream& in, const std::string& name) {
  std::string line;
  if (!std::getline(in, line)) fail_at(name, 1, "empty file");
  strip_cr(line);
  if (line != kPetCsvHeader)
    fail_at(name, 1,
            std::string("header must be exactly \"") + kPetCsvHeader + "\"");

  struct Row {
    std::size_t line;
    RawObs obs;
  };
  std::map<std::string, std::vector<Row>> rows;
  std::map<std::string, bool> treated_flag;

  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    strip_cr(line);
    if (line.empty()) fail_at(name, lineno, "blank line");
    auto f = split_fields(line);
    if (f.size() != 6)
      fail_at(name, lineno,
              "expected 6 fields, got " + std::to_string(f.size()));

    std::string site(f[0]);
    if (site.empty()) fail_at(name, lineno, "empty site_id");

    int y, m, d;
    if (!parse_date(f[1], y, m, d))
      fail_at(name, lineno, "bad date \"" + std::string(f[1]) +
                                "\", expected yyyy-mm-dd");

    int slot = parse_slot(f[2]);
    if (slot < 0)
      fail_at(name, lineno,
              "bad interval_start \"" + std::string(f[2]) +
                  "\", expected HH:MM on the 10-minute grid 08:00-19:50");

    double pet = kNaN;
    if (!f[3].empty()) {
      if (!parse_double_strict(f[3], pet))
        fail_at(name, lineno, "bad pet_seconds \"" + std::string(f[3]) + "\"");
      if (!(pet > 0.0 && pet < 15.0))
        fail_at(name, lineno, "pet_seconds " + std::string(f[3]) +
                                  " outside (0,15)");
    }

    int period;
    if (f[4] == "before")
      period = 0;
    else if (f[4] == "after")
      period = 1;
    else
      fail_at(name, lineno, "bad period \"" + std::string(f[4]) +
                                "\", expected before or after");

    bool treated;
    if (f[5] == "0")
      treated = false;
    else if (f[5] == "1")
      treated = true;
    else
      fail_at(name, lineno,
              "bad treated \"" + std::string(f[5]) + "\", expected 0 or 1");

    auto [it, inserted] = treated_flag.emplace(site, treated);
    if (!inserted && it->second != treated)
      fail_at(name, lineno,
              "treated flag for site " + site + " changed mid-file");

    rows[site].push_back({lineno, RawObs{std::string(f[1]), slot, pet, period}});
  }

  std::vector<SiteRecord> sites;
  sites.reserve(rows.size());
  for (auto& [id, rs] : rows) {
    std::stable_sort(rs.begin(), rs.end(), [](const Row& a, const Row& b) {
      if (a.obs.date != b.obs.date) return a.obs.date < b.obs.date;
      return a.obs.slot < b.obs.slot;
    });
    for (std::size_t i = 1; i < rs.size(); ++i) {
      if (rs[i].obs.date == rs[i - 1].obs.date &&
          rs[i].obs.slot == rs[i - 1].obs.slot)
        fail_at(name, rs[i].line,
                "duplicate interval " + id + " " + rs[i].obs.date + " " +
                    slot_to_hhmm(rs[i].obs.slot));
    }
    SiteRecord rec;
    rec.site_id = id;
    rec.treated = treated_flag[id];
    rec.obs.reserve(rs.size());
    for (auto& r : rs) rec.obs.push_back(std::move(r.obs));
    sites.push_back(std::move(rec));
  }
  return sites;
}

std::vector<SiteRecord> ingest_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path);
  return ingest_csv(in, path);
}

void write_pet_csv(std::span<const SiteRecord> sites, const std::string& path) {
  auto out = open_out(path);
  out << kPetCsvHeader << '\n';
  for (const auto& site : sites) {
    for (const auto& o : site.obs) {
      out << site.site_id << ',' << o.date << ',' << slot_to_hhmm(o.slot)
          << ',';
      if (!std::isnan(o.pet)) out << shortest(o.pet);
      out << ',' << (o.period == 0 ? "before" : "after") << ','
          << (site.treated ? '1' : '0') << '\n';
    }
  }
  if (!out) throw std::runtime_error("write failed for " + path);
}

// --- configuration --------------------------------------------------------

StudyConfig load_config(std::istream& in, const std::string& name) {
  StudyConfig cfg;
  enum Section { none = -1, study, priors, mcmc, sites };
  Section sec = none;

  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    strip_cr(line);
    std::string_view t = trim(line);
    if (t.empty() || t.front() == '#' || t.front() == ';') continue;

    if (t.front() == '[') {
      if (t.back() != ']') fail_at(name, lineno, "unterminated section header");
      std::string_view s = trim(t.substr(1, t.size() - 2));
      if (s == "study")
        sec = study;
      else if (s == "priors")
        sec = priors;
      else if (s == "mcmc")
        sec = mcmc;
      else if (s == "sites")
        sec = sites;
      else
        fail_at(name, lineno, "unknown section [" + std::string(s) + "]");
      continue;
    }

    std::size_t eq = t.find('=');
    if (eq == std::string_view::npos)
      fail_at(name, lineno, "expected key = value");
    std::string key(trim(t.substr(0, eq)));
    std::string val(trim(t.substr(eq + 1)));
    if (key.empty()) fail_at(name, lineno, "empty key");
    if (val.empty()) fail_at(name, lineno, "empty value for " + key);

    auto need_double = [&]() {
      double v;
      if (!parse_double_strict(val, v))
        fail_at(name, lineno, "bad number \"" + val + "\" for " + key);
      return v;
    };
    auto need_u64 = [&]() {
      std::uint64_t v;
      if (!parse_u64(val, v))
        fail_at(name, lineno, "bad integer \"" + val + "\" for " + key);
      return v;
    };

    switch (sec) {
      case none:
        fail_at(name, lineno, "key outside any section");
      case study:
        if (key == "mode") {
          try {
            cfg.mode = parse_mode(val);
          } catch (const std::invalid_argument& e) {
            fail_at(name, lineno, e.what());
          }
        } else if (key == "kappa") {
          std::uint64_t k = need_u64();
          if (k < 1) fail_at(name, lineno, "kappa must be >= 1");
          cfg.run_length = static_cast<std::size_t>(k);
        } else {
          fail_at(name, lineno, "unknown key " + key + " in [study]");
        }
        break;
      case priors: {
        double v = need_double();
        double* slot = nullptr;
        if (key == "beta0_mean")
          slot = &cfg.priors.beta0.mean;
        else if (key == "beta1_mean")
          slot = &cfg.priors.beta1.mean;
        else if (key == "shape_mean")
          slot = &cfg.priors.shape.mean;
        else if (key == "beta0_variance")
          slot = &cfg.priors.beta0.variance;
        else if (key == "beta1_variance")
          slot = &cfg.priors.beta1.variance;
        else if (key == "shape_variance")
          slot = &cfg.priors.shape.variance;
        else
          fail_at(name, lineno, "unknown key " + key + " in [priors]");
        if (key.ends_with("_variance") && !(v > 0.0))
          fail_at(name, lineno, key + " must be > 0");
        *slot = v;
        break;
      }
      case mcmc:
        if (key == "retained_draws") {
          std::uint64_t v = need_u64();
          if (v < 1) fail_at(name, lineno, "retained_draws must be >= 1");
          cfg.mcmc.retained_draws = static_cast<std::size_t>(v);
        } else if (key == "thin") {
          std::uint64_t v = need_u64();
          if (v < 1) fail_at(name, lineno, "thin must be >= 1");
          cfg.mcmc.thin = static_cast<std::size_t>(v);
        } else if (key == "burn_in") {
          cfg.mcmc.burn_in = static_cast<std::size_t>(need_u64());
        } else if (key == "seed") {
          cfg.mcmc.seed = need_u64();
        } else if (key == "pilot_iterations") {
          cfg.mcmc.pilot_iterations = static_cast<std::size_t>(need_u64());
        } else if (key == "target_acceptance") {
          double v = need_double();
          if (!(v > 0.0 && v < 1.0))
            fail_at(name, lineno, "target_acceptance must be in (0,1)");
          cfg.mcmc.target_acceptance = v;
        } else {
          fail_at(name, lineno, "unknown key " + key + " in [mcmc]");
        }
        break;
      case sites: {
        if (cfg.thresholds.count(key))
          fail_at(name, lineno, "duplicate threshold for site " + key);
        cfg.thresholds[key] = need_double();
        break;
      }
    }
  }
  return cfg;
}

StudyConfig load_config(const std::string& path) {
  std::istringstream in(read_file(path));
  return load_config(in, path);
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// --- report emission ------------------------------------------------------

std::string format_g6(double v) {
  if (!std::isfinite(v)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

namespace {

const char* const kParamNames[4] = {"beta0", "beta1", "shape", "alpha"};

int n_sampled(FitMode m) { return m == FitMode::markov ? 4 : 3; }

}  // namespace

void emit_report(const StudyReport& r, const std::string& out_dir,
                 bool with_svg) {
  const std::string base = out_dir.empty() ? std::string(".") : out_dir;
  std::error_code ec;
  std::filesystem::create_directories(base, ec);

  {
    auto out = open_out(base + "/summary.csv");
    out << "site,mode,parameter,mean,lo95,hi95,threshold\n";
    for (const auto& res : r.results) {
      for (int j = 0; j < n_sampled(res.mode); ++j) {
        const ParamSummary& p = res.summary.param[j];
        out << res.site_id << ',' << mode_name(res.mode) << ','
            << kParamNames[j] << ',' << format_g6(p.mean) << ','
            << format_g6(p.q025) << ',' << format_g6(p.q975) << ','
            << format_g6(res.threshold) << '\n';
      }
    }
    if (!out) throw std::runtime_error("write failed for summary.csv");
  }

  {
    auto out = open_out(base + "/caterpillar.csv");
    out << "site,treated,mode,mean,lo95,hi95\n";
    for (const auto& row : r.caterpillar) {
      out << row.site_id << ',' << (row.treated ? '1' : '0') << ','
          << mode_name(row.mode) << ',' << format_g6(row.mean) << ','
          << format_g6(row.lo) << ',' << format_g6(row.hi) << '\n';
    }
    if (!out) throw std::runtime_error("write failed for caterpillar.csv");
  }

  {
    nlohmann::ordered_json j;
    j["command"] = r.meta.command;
    j["version"] = kVersion;
    j["config_hash"] = r.meta.config_hash;
    j["seed"] = r.meta.seed;
    j["mode"] = mode_name(r.meta.mode);
    j["kappa"] = r.meta.run_length;
    auto arr = nlohmann::ordered_json::array();
    for (const auto& res : r.results) {
      nlohmann::ordered_json s;
      s["site"] = res.site_id;
      s["treated"] = res.treated;
      s["threshold"] = res.threshold;
      s["n_obs"] = {res.n_obs[0], res.n_obs[1]};
      s["n_exceed"] = {res.n_exceed[0], res.n_exceed[1]};
      s["verdict"] = res.verdict == Verdict::effective ? "effective"
                     : res.verdict == Verdict::adverse ? "adverse"
                                                       : "inconclusive";
      auto sd = nlohmann::ordered_json::array();
      auto acc = nlohmann::ordered_json::array();
      for (int k = 0; k < n_sampled(res.mode); ++k) {
        sd.push_back(res.proposal_sd[k]);
        acc.push_back(res.acceptance[k]);
      }
      s["proposal_sd"] = sd;
      s["acceptance"] = acc;
      if (std::isfinite(res.theta_hat)) s["theta_hat"] = res.theta_hat;
      arr.push_back(std::move(s));
    }
    j["sites"] = std::move(arr);
    auto out = open_out(base + "/run_meta.json");
    out << j.dump(2) << '\n';
    if (!out) throw std::runtime_error("write failed for run_meta.json");
  }

  if (with_svg)
    write_caterpillar_svg(r.caterpillar, base + "/caterpillar.svg");
}

// --- plot tables ----------------------------------------------------------

void write_mrl_csv(std::span<const MrlPoint> curve, const std::string& path) {
  auto out = open_out(path);
  out << "threshold,mean_excess,n_excess,ci_halfwidth\n";
  for (const auto& p : curve) {
    out << format_g6(p.threshold) << ',' << format_g6(p.mean_excess) << ','
        << p.n_excess << ',' << format_g6(p.ci_halfwidth) << '\n';
  }
  if (!out) throw std::runtime_error("write failed for " + path);
}

namespace {

struct AxisMap {
  double lo, hi, px0, px1;
  double operator()(double v) const {
    return px0 + (v - lo) / (hi - lo) * (px1 - px0);
  }
};

void pad_range(double& lo, double& hi, double frac) {
  if (!(hi > lo)) {
    lo -= 1.0;
    hi += 1.0;
  }
  double pad = frac * (hi - lo);
  lo -= pad;
  hi += pad;
}

void svg_open(std::ofstream& out, double w, double h) {
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << format_g6(w)
      << "\" height=\"" << format_g6(h) << "\" viewBox=\"0 0 " << format_g6(w)
      << ' ' << format_g6(h)
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
}

void svg_line(std::ofstream& out, double x1, double y1, double x2, double y2,
              const char* style) {
  out << "<line x1=\"" << format_g6(x1) << "\" y1=\"" << format_g6(y1)
      << "\" x2=\"" << format_g6(x2) << "\" y2=\"" << format_g6(y2) << "\" "
      << style << "/>\n";
}

void svg_text(std::ofstream& out, double x, double y, const char* anchor,
              const std::string& s) {
  out << "<text x=\"" << format_g6(x) << "\" y=\"" << format_g6(y)
      << "\" text-anchor=\"" << anchor << "\">" << xml_escape(s)
      << "</text>\n";
}

}  // namespace

void write_mrl_svg(std::span<const MrlPoint> curve, const std::string& path,
                   const std::string& title) {
  std::vector<MrlPoint> pts;
  for (const auto& p : curve)
    if (std::isfinite(p.mean_excess)) pts.push_back(p);

  const double w = 640, h = 400, ml = 70, mr = 24, mt = 46, mb = 52;
  auto out = open_out(path);
  svg_open(out, w, h);
  svg_text(out, w / 2, 24, "middle", "Mean residual life: " + title);

  if (pts.empty()) {
    svg_text(out, w / 2, h / 2, "middle", "no exceedances on the grid");
    out << "</svg>\n";
    return;
  }

  double xlo = pts.front().threshold, xhi = pts.back().threshold;
  double ylo = pts.front().mean_excess, yhi = ylo;
  for (const auto& p : pts) {
    double half = std::isfinite(p.ci_halfwidth) ? p.ci_halfwidth : 0.0;
    ylo = std::min(ylo, p.mean_excess - half);
    yhi = std::max(yhi, p.mean_excess + half);
  }
  pad_range(xlo, xhi, 0.04);
  pad_range(ylo, yhi, 0.08);
  AxisMap X{xlo, xhi, ml, w - mr};
  AxisMap Y{ylo, yhi, h - mb, mt};  // inverted: larger values higher up

  svg_line(out, ml, mt, ml, h - mb, "stroke=\"#333\"");
  svg_line(out, ml, h - mb, w - mr, h - mb, "stroke=\"#333\"");
  for (int k = 0; k <= 4; ++k) {
    double xv = xlo + k * (xhi - xlo) / 4;
    double yv = ylo + k * (yhi - ylo) / 4;
    svg_line(out, X(xv), h - mb, X(xv), h - mb + 5, "stroke=\"#333\"");
    svg_text(out, X(xv), h - mb + 20, "middle", format_g6(xv));
    svg_line(out, ml - 5, Y(yv), ml, Y(yv), "stroke=\"#333\"");
    svg_text(out, ml - 8, Y(yv) + 4, "end", format_g6(yv));
  }
  svg_text(out, (ml + w - mr) / 2, h - 14, "middle", "threshold");
  out << "<text x=\"18\" y=\"" << format_g6((mt + h - mb) / 2)
      << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
      << format_g6((mt + h - mb) / 2) << ")\">mean excess</text>\n";

  auto polyline = [&](auto value, const char* style) {
    out << "<polyline fill=\"none\" " << style << " points=\"";
    bool first = true;
    for (const auto& p : pts) {
      double v = value(p);
      if (!std::isfinite(v)) continue;
      if (!first) out << ' ';
      out << format_g6(X(p.threshold)) << ',' << format_g6(Y(v));
      first = false;
    }
    out << "\"/>\n";
  };
  polyline([](const MrlPoint& p) { return p.mean_excess + p.ci_halfwidth; },
           "stroke=\"#9bc4e2\" stroke-width=\"1\"");
  polyline([](const MrlPoint& p) { return p.mean_excess - p.ci_halfwidth; },
           "stroke=\"#9bc4e2\" stroke-width=\"1\"");
  polyline([](const MrlPoint& p) { return p.mean_excess; },
           "stroke=\"#1f6fb4\" stroke-width=\"1.5\"");

  out << "</svg>\n";
  if (!out) throw std::runtime_error("write failed for " + path);
}

void write_caterpillar_svg(std::span<const CatRow> rows,
                           const std::string& path) {
  const double ml = 190, mr = 30, mt = 46, mb = 52, rowh = 30, pw = 430;
  const double w = ml + pw + mr;
  const double h = mt + std::max<std::size_t>(rows.size(), 1) * rowh + mb;

  auto out = open_out(path);
  svg_open(out, w, h);
  svg_text(out, w / 2, 24, "middle",
           "Period effect: posterior mean and 95% interval");

  if (rows.empty()) {
    svg_text(out, w / 2, h / 2, "middle", "no sites");
    out << "</svg>\n";
    return;
  }

  double lo = 0.0, hi = 0.0;
  for (const auto& r : rows) {
    lo = std::min({lo, r.lo, r.mean});
    hi = std::max({hi, r.hi, r.mean});
  }
  pad_range(lo, hi, 0.06);
  AxisMap X{lo, hi, ml, ml + pw};

  svg_line(out, X(0.0), mt - 6, X(0.0), h - mb + 6,
           "stroke=\"#999\" stroke-dasharray=\"4 3\"");
  svg_line(out, ml, h - mb, ml + pw, h - mb, "stroke=\"#333\"");
  for (int k = 0; k <= 4; ++k) {
    double v = lo + k * (hi - lo) / 4;
    svg_line(out, X(v), h - mb, X(v), h - mb + 5, "stroke=\"#333\"");
    svg_text(out, X(v), h - mb + 20, "middle", format_g6(v));
  }
  svg_text(out, (ml + ml + pw) / 2, h - 14, "middle",
           "period coefficient (log scale ratio)");

  for (std::size_t i = 0; i < rows.size(); ++i) {
    const CatRow& r = rows[i];
    double y = mt + (i + 0.5) * rowh;
    const char* color = r.treated ? "#1f6fb4" : "#b4641f";
    std::string stroke = std::string("stroke=\"") + color +
                         "\" stroke-width=\"2\"";
    svg_line(out, X(r.lo), y, X(r.hi), y, stroke.c_str());
    svg_line(out, X(r.lo), y - 4, X(r.lo), y + 4, stroke.c_str());
    svg_line(out, X(r.hi), y - 4, X(r.hi), y + 4, stroke.c_str());
    out << "<circle cx=\"" << format_g6(X(r.mean)) << "\" cy=\""
        << format_g6(y) << "\" r=\"4\" fill=\"" << color << "\"/>\n";
    svg_text(out, ml - 10, y + 4, "end",
             r.site_id + " (" + mode_name(r.mode) + ", " +
                 (r.treated ? "treated" : "control") + ")");
  }

  out << "</svg>\n";
  if (!out) throw std::runtime_error("write failed for " + path);
}

std::vector<CatRow> read_caterpillar_csv(const std::string& path) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line)) fail_at(path, 1, "empty file");
  strip_cr(line);
  if (line != "site,treated,mode,mean,lo95,hi95")
    fail_at(path, 1, "unexpected header \"" + line + "\"");

  std::vector<CatRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    strip_cr(line);
    if (line.empty()) fail_at(path, lineno, "blank line");
    auto f = split_fields(line);
    if (f.size() != 6)
      fail_at(path, lineno,
              "expected 6 fields, got " + std::to_string(f.size()));
    CatRow r;
    r.site_id = std::string(f[0]);
    if (f[1] == "0")
      r.treated = false;
    else if (f[1] == "1")
      r.treated = true;
    else
      fail_at(path, lineno, "bad treated \"" + std::string(f[1]) + "\"");
    try {
      r.mode = parse_mode(std::string(f[2]));
    } catch (const std::invalid_argument& e) {
      fail_at(path, lineno, e.what());
    }
    double* cells[3] = {&r.mean, &r.lo, &r.hi};
    for (int k = 0; k < 3; ++k) {
      if (f[3 + k].empty()) {
        *cells[k] = kNaN;
      } else if (!parse_double_strict(f[3 + k], *cells[k])) {
        fail_at(path, lineno, "bad number \"" + std::string(f[3 + k]) + "\"");
      }
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<MrlPoint> read_mrl_csv(const std::string& path) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line)) fail_at(path, 1, "empty file");
  strip_cr(line);
  if (line != "threshold,mean_excess,n_excess,ci_halfwidth")
    fail_at(path, 1, "unexpected header \"" + line + "\"");

  std::vector<MrlPoint> pts;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    strip_cr(line);
    if (line.empty()) fail_at(path, lineno, "blank line");
    auto f = split_fields(line);
    if (f.size() != 4)
      fail_at(path, lineno,
              "expected 4 fields, got " + std::to_string(f.size()));
    MrlPoint p;
    if (!parse_double_strict(f[0], p.threshold))
      fail_at(path, lineno, "bad threshold \"" + std::string(f[0]) + "\"");
    p.mean_excess = kNaN;
    if (!f[1].empty() && !parse_double_strict(f[1], p.mean_excess))
      fail_at(path, lineno, "bad mean_excess \"" + std::string(f[1]) + "\"");
    std::uint64_t n;
    if (!parse_u64(f[2], n))
      fail_at(path, lineno, "bad n_excess \"" + std::string(f[2]) + "\"");
    p.n_excess = static_cast<std::size_t>(n);
    p.ci_halfwidth = kNaN;
    if (!f[3].empty() && !parse_double_strict(f[3], p.ci_halfwidth))
      fail_at(path, lineno, "bad ci_halfwidth \"" + std::string(f[3]) + "\"");
    pts.push_back(p);
  }
  return pts;
}

// --- synthetic data -------------------------------------------------------

namespace {

// Days since 1970-01-01 for a Gregorian calendar date, and back. Standard
// civil-calendar shift-era arithmetic, exact over the full int range.
long days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  long era = (y >= 0 ? y : y - 399) / 400;
  unsigned yoe = static_cast<unsigned>(y - era * 400);
  unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<long>(doe) - 719468;
}

void civil_from_days(long z, int& y, int& m, int& d) {
  z += 719468;
  long era = (z >= 0 ? z : z - 146096) / 146097;
  unsigned doe = static_cast<unsigned>(z - era * 146097);
  unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  long yr = static_cast<long>(yoe) + era * 400;
  unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  unsigned mp = (5 * doy + 2) / 153;
  d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
  m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
  y = static_cast<int>(yr + (m <= 2));
}

}  // namespace

std::string add_days(const std::string& iso_date, int days) {
  int y, m, d;
  if (!parse_date(iso_date, y, m, d))
    throw ValidationError("bad date \"" + iso_date + "\", expected yyyy-mm-dd");
  civil_from_days(days_from_civil(y, m, d) + days, y, m, d);
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", y, m, d);
  return buf;
}

SiteRecord synthesize_site(const SimSpec& spec, const std::string& site_id,
                           bool treated,
                           const std::array<std::string, 2>& start_dates) {
  if (spec.day_length < 1 || spec.day_length > 72)
    throw ValidationError("day_length must be in [1,72]");
  if (spec.n_per_period[0] < 1 || spec.n_per_period[1] < 1)
    throw ValidationError("both periods need at least one interval");
  for (const auto& d : start_dates) add_days(d, 0);  // validates the format

  PreparedSeries s = simulate_series(spec);

  SiteRecord rec;
  rec.site_id = site_id;
  rec.treated = treated;
  rec.threshold = spec.threshold;
  rec.obs.reserve(s.values.size());

  std::size_t pos = 0;
  std::string last_before_date;
  for (int t = 0; t < 2; ++t) {
    std::string date = start_dates[t];
    if (t == 1 && date <= last_before_date)
      throw ValidationError("after-period start date " + date +
                            " does not follow the before period (last day " +
                            last_before_date + ")");
    std::size_t remaining = spec.n_per_period[t];
    while (remaining > 0) {
      std::size_t len = std::min<std::size_t>(spec.day_length, remaining);
      for (std::size_t k = 0; k < len; ++k, ++pos) {
        double pet = -s.values[pos];
        if (!(pet > 0.0 && pet < 15.0))
          throw ValidationError(
              "simulated PET " + shortest(pet) +
              " outside (0,15); adjust threshold, scales, or shape");
        rec.obs.push_back(RawObs{date, static_cast<int>(k), pet, t});
      }
      remaining -= len;
      if (t == 0) last_before_date = date;
      date = add_days(date, 1);
    }
  }
  return rec;
}

}  // namespace petx
