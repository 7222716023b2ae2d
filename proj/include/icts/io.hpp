#ifndef ICTS_IO_HPP
#define ICTS_IO_HPP

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "icts/analysis.hpp"
#include "icts/error.hpp"
#include "icts/filter.hpp"
#include "icts/mcmc.hpp"
#include "icts/model.hpp"
#include "icts/tvar_sim.hpp"

namespace icts {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Dates

using Date = std::chrono::sys_days;

/// Reference date for the seasonal phase: day 0 of the phase cycle.
inline Date phase_epoch() { return Date{std::chrono::year{2000} / 1 / 1}; }

/// Strict YYYY-MM-DD.
inline std::optional<Date> parse_date(const std::string& s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  for (std::size_t i : {0, 1, 2, 3, 5, 6, 8, 9})
    if (s[i] < '0' || s[i] > '9') return std::nullopt;
  const int y = std::stoi(s.substr(0, 4));
  const unsigned m = static_cast<unsigned>(std::stoi(s.substr(5, 2)));
  const unsigned d = static_cast<unsigned>(std::stoi(s.substr(8, 2)));
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
  if (!ymd.ok()) return std::nullopt;
  return Date{ymd};
}

inline std::string format_date(Date d) {
  const std::chrono::year_month_day ymd{d};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

/// Phase origin that places model time t = 1 on `first`, with phase 0 at
/// the epoch: season_time(t) = days since 2000-01-01 of date(t).
inline double phase_origin_for(Date first) {
  return static_cast<double>((first - phase_epoch()).count()) - 1.0;
}

// ---------------------------------------------------------------------------
// Daily series

struct DailySeries {
  Date start{};
  Series values;

  long length() const { return static_cast<long>(values.size()); }
  Date date(long t) const { return start + std::chrono::days{t - 1}; }
  long missing() const {
    return static_cast<long>(std::count_if(values.begin(), values.end(), [](const auto& v) { return !v; }));
  }
  double phase_origin() const { return phase_origin_for(start); }

  std::string summary() const {
    std::ostringstream os;
    os << "T=" << length() << " missing=" << missing();
    if (length() > 0) os << " range=" << format_date(date(1)) << ".." << format_date(date(length()));
    return os.str();
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::optional<double> parse_double(const std::string& s) {
  if (s.empty()) return std::nullopt;
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    return std::nullopt;
  }
  if (pos != s.size()) return std::nullopt;
  return v;
}

inline std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace detail

/// Reads a `date,value` CSV. Rows must have strictly increasing dates;
/// gaps are filled with missing values, as are rows whose value is empty,
/// NA or NaN.
inline DailySeries ingest_csv(std::istream& in, const std::string& source = "input") {
  std::string line;
  long line_no = 0;
  auto fail = [&](const std::string& why) {
    throw InputError(source + ":" + std::to_string(line_no) + ": " + why);
  };
  if (!std::getline(in, line)) throw InputError(source + ": empty file");
  ++line_no;
  if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
  {
    std::string h = detail::trim(line);
    if (h != "date,value") fail("expected header 'date,value', got '" + h + "'");
  }
  DailySeries out;
  std::optional<Date> prev;
  long prev_line = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string row = detail::trim(line);
    if (row.empty()) continue;
    const auto comma = row.find(',');
    if (comma == std::string::npos || row.find(',', comma + 1) != std::string::npos)
      fail("expected two fields 'date,value'");
    const std::string ds = detail::trim(row.substr(0, comma));
    const std::string vs = detail::trim(row.substr(comma + 1));
    const auto d = parse_date(ds);
    if (!d) fail("unparseable date '" + ds + "'");
    std::optional<double> v;
    if (!(vs.empty() || vs == "NA" || vs == "NaN" || vs == "nan")) {
      v = detail::parse_double(vs);
      if (!v || !std::isfinite(*v)) fail("unparseable value '" + vs + "'");
    }
    if (prev) {
      if (*d == *prev) fail("duplicate date " + ds + " (first on line " + std::to_string(prev_line) + ")");
      if (*d < *prev) fail("date " + ds + " precedes the previous row's date " + format_date(*prev));
      for (Date g = *prev + std::chrono::days{1}; g < *d; g += std::chrono::days{1}) out.values.emplace_back();
    } else {
      out.start = *d;
    }
    out.values.push_back(v);
    prev = d;
    prev_line = line_no;
  }
  if (out.values.empty()) throw InputError(source + ": no data rows");
  return out;
}

inline DailySeries ingest_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open data file " + path.string());
  return ingest_csv(in, path.string());
}

inline void write_series_csv(std::ostream& os, const DailySeries& s) {
  os << "date,value\n";
  for (long t = 1; t <= s.length(); ++t) {
    os << format_date(s.date(t)) << ',';
    if (s.values[t - 1]) os << detail::fmt(*s.values[t - 1]);
    os << '\n';
  }
}

// ---------------------------------------------------------------------------
// Flat dotted key = value configuration

struct ConfigKey {
  const char* key;
  const char* default_value;
  const char* doc;
};

/// Every fixed key with its default. Per-parameter keys are documented in
/// config_key_patterns().
inline const std::vector<ConfigKey>& config_schema() {
  static const std::vector<ConfigKey> schema = {
      {"run.seed", "1", "master seed; sub-seeds for simulation, chains, analysis derive from it"},
      {"output.dir", "out", "run directory"},
      {"output.trajectory_archive", "10", "number of thinned state trajectories written to trajectories.csv"},
      {"data.path", "", "input CSV with header date,value (fit, compare, analyze, forecast)"},
      {"model.K", "2", "number of harmonics"},
      {"model.P", "5", "TVAR order"},
      {"model.intervention", "none", "none | mean | autocorrelation"},
      {"model.period_length", "365.25", "seasonal period in days"},
      {"model.phase_origin", "auto", "auto (from the first date) or a number"},
      {"state_prior.preset", "informative", "theta_0 prior: informative | vague"},
      {"priors.preset", "informative", "hyper-parameter priors: informative | vague"},
      {"priors.tie_psi", "true", "W_psi = W_mu when true, otherwise logWpsi is sampled"},
      {"mcmc.chains", "4", "number of chains"},
      {"mcmc.block_size", "1000", "iterations per block"},
      {"mcmc.psrf_phase1", "2.0", "PSRF threshold ending the burn-in phase"},
      {"mcmc.psrf_target", "1.1", "PSRF threshold for adaptation and termination"},
      {"mcmc.ess_target", "1000", "minimum ESS at termination"},
      {"mcmc.max_blocks", "200", "block budget"},
      {"mcmc.epsilon", "1e-6", "adaptive-covariance regulariser"},
      {"mcmc.init_attempts", "100", "prior draws tried per chain for a finite start"},
      {"mcmc.n_state_samples", "1000", "thinned draws kept for state sampling"},
      {"mcmc.parallel", "true", "run chains on threads"},
      {"sim.scenario", "basic", "basic | mean | autocorrelation"},
      {"sim.preset", "fast", "fast | slow coefficient evolution"},
      {"sim.length", "3650", "number of simulated days"},
      {"sim.start_date", "2000-01-01", "date of t = 1 in observations.csv"},
      {"sim.pacf_scaling", "calibrated", "calibrated | direct"},
      {"sim.initial_pacf", "default", "comma-separated PACF start values or 'default'"},
      {"sim.state_prior", "vague", "theta_0 distribution for simulation: informative | vague"},
      {"analysis.season_sets", "DJF@12-01+90", "name@MM-DD+days, comma-separated"},
      {"analysis.n_samples", "200", "thinned draws used for attribution and ANOVA"},
      {"analysis.level", "0.90", "credible level for ANOVA and PPC bands"},
      {"analysis.clamp_shares", "false", "clamp reported ANOVA shares to [0, 1]"},
      {"analysis.ppc_samples", "100", "replicate series in the predictive checks"},
      {"analysis.ppc_start", "366", "first model time of the predictive-check window"},
      {"analysis.max_lag", "10", "largest ACF lag"},
      {"forecast.init_dates", "11-01,12-01", "MM-DD initialisation dates, comma-separated"},
      {"forecast.end_date", "02-28", "MM-DD last day of the target window"},
      {"forecast.n_samples", "50", "posterior draws per forecast"},
      {"forecast.paths", "20", "simulated paths per draw"},
  };
  return schema;
}

/// Families of per-name keys.
inline const std::vector<ConfigKey>& config_key_patterns() {
  static const std::vector<ConfigKey> patterns = {
      {"priors.<param>.dist", "preset", "normal | flat | uniform | triangular | beta"},
      {"priors.<param>.{mean,sd,lo,hi,mode,a,b}", "preset", "prior parameters for the chosen dist"},
      {"mcmc.sigma0.<param>", "preset", "initial proposal variance on the sampling scale"},
      {"state_prior.<state>.{mean,var}", "preset", "theta_0 mean and variance for one state component"},
      {"sim.<field>", "preset", "simulation hyper-parameter: V W_mu W_beta W_psi W_phi W_X a b alpha gamma rho varphi W_delta"},
  };
  return patterns;
}

inline const std::vector<std::string>& hyper_field_names() {
  static const std::vector<std::string> names = {"V", "W_mu", "W_beta", "W_psi", "W_phi", "W_X", "a",
                                                 "b", "alpha", "gamma", "rho", "varphi", "W_delta"};
  return names;
}

inline HyperField hyper_field_from_string(const std::string& s) {
  const auto& n = hyper_field_names();
  const auto it = std::find(n.begin(), n.end(), s);
  if (it == n.end()) throw InputError("unknown hyper-parameter '" + s + "'");
  return static_cast<HyperField>(it - n.begin());
}

/// Parameter names known to any model variant.
inline std::vector<std::string> all_parameter_names() {
  ParameterSet s = ParameterSet::informative(InterventionKind::Mean);
  s.untie_psi();
  return s.names();
}

class Config {
 public:
  Config() {
    for (const auto& k : config_schema()) values_[k.key] = k.default_value;
  }

  static bool is_known_key(const std::string& key) {
    for (const auto& k : config_schema())
      if (key == k.key) return true;
    const auto dot = [&](std::size_t from) { return key.find('.', from); };
    auto starts = [&](const std::string& p) { return key.rfind(p, 0) == 0; };
    if (starts("priors.")) {
      const auto d = dot(7);
      if (d == std::string::npos) return false;
      const std::string name = key.substr(7, d - 7), field = key.substr(d + 1);
      const auto names = all_parameter_names();
      if (std::find(names.begin(), names.end(), name) == names.end()) return false;
      for (const char* f : {"dist", "mean", "sd", "lo", "hi", "mode", "a", "b"})
        if (field == f) return true;
      return false;
    }
    if (starts("mcmc.sigma0.")) {
      const auto names = all_parameter_names();
      return std::find(names.begin(), names.end(), key.substr(12)) != names.end();
    }
    if (starts("state_prior.")) {
      const auto d = key.rfind('.');
      if (d <= 12) return false;
      const std::string field = key.substr(d + 1);
      return field == "mean" || field == "var";  // component names are checked against the layout
    }
    if (starts("sim.")) {
      const auto& n = hyper_field_names();
      return std::find(n.begin(), n.end(), key.substr(4)) != n.end();
    }
    return false;
  }

  void set(const std::string& key, const std::string& value) {
    if (!is_known_key(key)) throw InputError("unknown configuration key '" + key + "'");
    values_[key] = value;
  }

  /// key=value
  void apply_override(const std::string& kv) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw InputError("override '" + kv + "' is not key=value");
    set(detail::trim(kv.substr(0, eq)), detail::trim(kv.substr(eq + 1)));
  }

  /// Lines "key = value"; '#' starts a comment; later duplicates are errors.
  void read(std::istream& in, const std::string& source = "config") {
    std::string line;
    long n = 0;
    std::map<std::string, long> seen;
    while (std::getline(in, line)) {
      ++n;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const std::string s = detail::trim(line);
      if (s.empty()) continue;
      const auto eq = s.find('=');
      auto where = [&] { return source + ":" + std::to_string(n) + ": "; };
      if (eq == std::string::npos) throw InputError(where() + "expected key = value");
      const std::string key = detail::trim(s.substr(0, eq));
      if (seen.count(key))
        throw InputError(where() + "duplicate key '" + key + "' (first on line " + std::to_string(seen[key]) + ")");
      seen[key] = n;
      if (!is_known_key(key)) throw InputError(where() + "unknown configuration key '" + key + "'");
      values_[key] = detail::trim(s.substr(eq + 1));
    }
  }

  void read_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config file " + path.string());
    read(in, path.string());
  }

  /// Every key in sorted order; reading this back reproduces the config.
  void write_resolved(std::ostream& os) const {
    os << "# resolved configuration\n";
    for (const auto& [k, v] : values_) os << k << " = " << v << '\n';
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  const std::map<std::string, std::string>& values() const { return values_; }

  std::string str(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw InputError("configuration key '" + key + "' is not set");
    return it->second;
  }

  double real(const std::string& key) const {
    const auto v = detail::parse_double(str(key));
    if (!v) throw InputError("configuration key '" + key + "' must be a number, got '" + str(key) + "'");
    return *v;
  }

  long integer(const std::string& key) const {
    const double v = real(key);
    if (v != std::floor(v) || std::abs(v) > 9.0e15)
      throw InputError("configuration key '" + key + "' must be an integer, got '" + str(key) + "'");
    return static_cast<long>(v);
  }

  std::uint64_t seed(const std::string& key) const {
    const std::string s = str(key);
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos)
      throw InputError("configuration key '" + key + "' must be a non-negative integer");
    return std::stoull(s);
  }

  bool boolean(const std::string& key) const {
    const std::string s = str(key);
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw InputError("configuration key '" + key + "' must be true or false");
  }

  std::optional<std::string> maybe(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return it->second;
  }

 private:
  std::map<std::string, std::string> values_;
};

inline std::vector<std::string> split_list(const std::string& s, char sep = ',') {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    item = detail::trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

/// "MM-DD" to a 0-based day of year.
inline int parse_month_day(const std::string& s) {
  if (s.size() != 5 || s[2] != '-') throw InputError("expected MM-DD, got '" + s + "'");
  const auto m = detail::parse_double(s.substr(0, 2)), d = detail::parse_double(s.substr(3, 2));
  if (!m || !d) throw InputError("expected MM-DD, got '" + s + "'");
  return day_of_year_from_month_day(static_cast<int>(*m), static_cast<int>(*d));
}

struct SeasonSet {
  std::string name;
  int start_doy = 0;
  int length = 0;
};

inline std::vector<SeasonSet> parse_season_sets(const std::string& s) {
  std::vector<SeasonSet> out;
  for (const std::string& item : split_list(s)) {
    const auto at = item.find('@'), plus = item.find('+');
    if (at == std::string::npos || plus == std::string::npos || plus < at)
      throw InputError("season set '" + item + "' is not name@MM-DD+days");
    SeasonSet ss;
    ss.name = item.substr(0, at);
    ss.start_doy = parse_month_day(item.substr(at + 1, plus - at - 1));
    const auto len = detail::parse_double(item.substr(plus + 1));
    if (!len || *len < 1 || *len != std::floor(*len)) throw InputError("season set '" + item + "' needs a positive length");
    ss.length = static_cast<int>(*len);
    out.push_back(ss);
  }
  if (out.empty()) throw InputError("analysis.season_sets is empty");
  return out;
}

/// Typed views of a Config.
struct RunConfig {
  Config raw;

  std::uint64_t seed() const { return raw.seed("run.seed"); }
  fs::path out_dir() const { return raw.str("output.dir"); }

  /// Model spec without the data-dependent length and phase.
  ModelSpec model_spec(std::optional<InterventionKind> kind = std::nullopt) const {
    ModelSpec spec;
    spec.harmonics = static_cast<int>(raw.integer("model.K"));
    spec.tvar_order = static_cast<int>(raw.integer("model.P"));
    spec.intervention = kind ? *kind : intervention_kind_from_string(raw.str("model.intervention"));
    spec.period_length = raw.real("model.period_length");
    if (spec.harmonics < 1 || spec.tvar_order < 1 || !(spec.period_length > 0.0))
      throw InputError("model.K and model.P must be >= 1 and model.period_length > 0");
    return spec;
  }

  /// Spec for a concrete series.
  ModelSpec model_spec_for(const DailySeries& data, std::optional<InterventionKind> kind = std::nullopt) const {
    ModelSpec spec = model_spec(kind);
    spec.data_length = static_cast<int>(data.length());
    const std::string po = raw.str("model.phase_origin");
    spec.phase_origin = po == "auto" ? data.phase_origin() : raw.real("model.phase_origin");
    spec.validate();
    return spec;
  }

  StatePrior state_prior(const ModelSpec& spec, const std::string& preset_key = "state_prior.preset",
                         bool overrides = true) const {
    const std::string preset = raw.str(preset_key);
    StatePrior pr;
    if (preset == "informative") pr = StatePrior::informative(spec);
    else if (preset == "vague") pr = StatePrior::vague(spec);
    else throw InputError(preset_key + " must be informative or vague");
    if (overrides) {
      const auto names = state_names(spec);
      for (const auto& [k, v] : raw.values()) {
        if (k.rfind("state_prior.", 0) != 0 || k == "state_prior.preset") continue;
        const auto d = k.rfind('.');
        const std::string comp = k.substr(12, d - 12), field = k.substr(d + 1);
        const auto it = std::find(names.begin(), names.end(), comp);
        if (it == names.end()) throw InputError("unknown state component '" + comp + "' in " + k);
        const int i = static_cast<int>(it - names.begin());
        (field == "mean" ? pr.mean[i] : pr.variance[i]) = raw.real(k);
      }
    }
    pr.validate(spec);
    return pr;
  }

  ParameterSet parameters(InterventionKind kind) const {
    ParameterSet ps = ParameterSet::preset(raw.str("priors.preset"), kind);
    if (!raw.boolean("priors.tie_psi")) ps.untie_psi();
    for (ParamSpec& p : ps.params) {
      const std::string base = "priors." + p.name + ".";
      if (auto d = raw.maybe(base + "dist")) {
        const auto kk = prior_kind_from_string(*d);
        if (kk != p.prior.kind) p.prior = PriorDist{kk, 0.0, 1.0, 0.0};
      }
      auto set = [&](const char* field, double& slot, std::initializer_list<PriorDist::Kind> kinds) {
        const auto v = raw.maybe(base + field);
        if (!v) return;
        if (std::find(kinds.begin(), kinds.end(), p.prior.kind) == kinds.end())
          throw InputError(base + field + " does not apply to a " + to_string(p.prior.kind) + " prior");
        slot = raw.real(base + field);
      };
      using K = PriorDist::Kind;
      set("mean", p.prior.p1, {K::Normal});
      set("sd", p.prior.p2, {K::Normal});
      set("lo", p.prior.p1, {K::Uniform, K::Triangular});
      set("hi", p.prior.p2, {K::Uniform, K::Triangular});
      set("mode", p.prior.p3, {K::Triangular});
      set("a", p.prior.p1, {K::Beta});
      set("b", p.prior.p2, {K::Beta});
      if (raw.has("mcmc.sigma0." + p.name)) p.proposal_variance = raw.real("mcmc.sigma0." + p.name);
    }
    ps.validate();
    return ps;
  }

  SamplerConfig sampler(std::uint64_t seed) const {
    SamplerConfig c;
    c.chains = static_cast<int>(raw.integer("mcmc.chains"));
    c.block_size = static_cast<int>(raw.integer("mcmc.block_size"));
    c.psrf_phase1 = raw.real("mcmc.psrf_phase1");
    c.psrf_target = raw.real("mcmc.psrf_target");
    c.ess_target = raw.real("mcmc.ess_target");
    c.max_blocks = static_cast<int>(raw.integer("mcmc.max_blocks"));
    c.epsilon = raw.real("mcmc.epsilon");
    c.init_attempts = static_cast<int>(raw.integer("mcmc.init_attempts"));
    c.n_state_samples = static_cast<int>(raw.integer("mcmc.n_state_samples"));
    c.parallel = raw.boolean("mcmc.parallel");
    c.seed = seed;
    c.validate();
    return c;
  }

  Scenario scenario() const { return scenario_from_string(raw.str("sim.scenario")); }

  HyperParams sim_params() const {
    HyperParams phi = simulation_params(scenario(), raw.str("sim.preset"));
    for (const auto& f : hyper_field_names()) {
      const std::string key = "sim." + f;
      if (raw.has(key) && raw.str(key) != "preset") field_ref(phi, hyper_field_from_string(f)) = raw.real(key);
    }
    return phi;
  }

  std::vector<double> initial_pacf(int P) const {
    const std::string s = raw.str("sim.initial_pacf");
    if (s == "default") return default_initial_pacf(P);
    std::vector<double> out;
    for (const auto& item : split_list(s)) {
      const auto v = detail::parse_double(item);
      if (!v) throw InputError("sim.initial_pacf entry '" + item + "' is not a number");
      out.push_back(*v);
    }
    if (static_cast<int>(out.size()) != P) throw InputError("sim.initial_pacf needs model.P entries");
    return out;
  }

  Date sim_start() const {
    const auto d = parse_date(raw.str("sim.start_date"));
    if (!d) throw InputError("sim.start_date must be YYYY-MM-DD");
    return *d;
  }

  fs::path data_path() const {
    const std::string p = raw.str("data.path");
    if (p.empty()) throw InputError("data.path is not set");
    return p;
  }
};

inline RunConfig load_run_config(const std::optional<fs::path>& path, const std::vector<std::string>& overrides) {
  RunConfig rc;
  if (path) rc.raw.read_file(*path);
  for (const auto& o : overrides) rc.raw.apply_override(o);
  return rc;
}

// ---------------------------------------------------------------------------
// Sample store persistence

inline void ensure_dir(const fs::path& p) {
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw InputError("cannot create directory " + p.string() + ": " + ec.message());
}

inline std::ofstream open_out(const fs::path& p) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw InputError("cannot write " + p.string());
  return os;
}

namespace detail {

inline Json vec_json(const std::vector<double>& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(std::isfinite(x) ? Json(x) : Json(nullptr));
  return a;
}

inline Json mat_json(const Matrix& m) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    std::vector<double> r(m.cols());
    for (Eigen::Index j = 0; j < m.cols(); ++j) r[j] = m(i, j);
    a.push_back(vec_json(r));
  }
  return a;
}

/// Simple numeric CSV reader: header row then rows of numbers.
inline std::pair<std::vector<std::string>, std::vector<std::vector<double>>> read_numeric_csv(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw InputError("missing file " + p.string());
  std::string line;
  std::getline(in, line);
  const auto header = split_list(line);
  std::vector<std::vector<double>> rows;
  long n = 1;
  while (std::getline(in, line)) {
    ++n;
    if (trim(line).empty()) continue;
    std::vector<double> r;
    for (const auto& f : split_list(line)) {
      const auto v = parse_double(f);
      if (!v) throw InputError(p.string() + ":" + std::to_string(n) + ": not a number '" + f + "'");
      r.push_back(*v);
    }
    if (r.size() != header.size()) throw InputError(p.string() + ":" + std::to_string(n) + ": wrong field count");
    rows.push_back(std::move(r));
  }
  return {header, rows};
}

}  // namespace detail

/// Writes chains/chain_<c>.csv (natural-scale draws), blocks.csv,
/// thinned.csv (sampling-scale draws and trajectory seeds) and meta.json.
inline void write_sample_store(const fs::path& dir, const SampleStore& s, const Json& extra = Json::object()) {
  ensure_dir(dir / "chains");
  for (std::size_t c = 0; c < s.chains.size(); ++c) {
    const ChainRecord& ch = s.chains[c];
    auto os = open_out(dir / "chains" / ("chain_" + std::to_string(c + 1) + ".csv"));
    os << "iteration";
    for (const auto& n : s.natural_names) os << ',' << n;
    os << ",log_post\n";
    for (Eigen::Index i = 0; i < ch.draws.rows(); ++i) {
      os << i + 1;
      for (Eigen::Index j = 0; j < ch.draws.cols(); ++j) os << ',' << detail::fmt(ch.draws(i, j));
      os << ',' << detail::fmt(ch.log_post[i]) << '\n';
    }
  }
  {
    auto os = open_out(dir / "blocks.csv");
    os << "block,phase";
    for (const auto& n : s.names) os << ",psrf_" << n;
    for (const auto& n : s.names) os << ",ess_" << n;
    for (std::size_t c = 0; c < s.chains.size(); ++c) os << ",acceptance_" << c + 1;
    os << '\n';
    for (const BlockRecord& b : s.blocks) {
      os << b.index + 1 << ',' << b.phase;
      for (int j = 0; j < s.dim(); ++j) os << ',' << (j < static_cast<int>(b.psrf.size()) ? detail::fmt(b.psrf[j]) : "");
      for (int j = 0; j < s.dim(); ++j) os << ',' << (j < static_cast<int>(b.ess.size()) ? detail::fmt(b.ess[j]) : "");
      for (std::size_t c = 0; c < s.chains.size(); ++c)
        os << ',' << (c < b.acceptance.size() ? detail::fmt(b.acceptance[c]) : "");
      os << '\n';
    }
  }
  {
    auto os = open_out(dir / "thinned.csv");
    os << "index,seed";
    for (const auto& n : s.names) os << ',' << n;
    os << '\n';
    for (std::size_t j = 0; j < s.thinned_index.size(); ++j) {
      os << s.thinned_index[j] << ',' << s.trajectory_seeds[j];
      for (int k = 0; k < s.dim(); ++k) os << ',' << detail::fmt(s.thinned_z(j, k));
      os << '\n';
    }
  }
  Json meta = Json::object();
  meta["converged"] = s.converged;
  meta["retained_phase"] = s.retained_phase;
  meta["names"] = s.names;
  meta["natural_names"] = s.natural_names;
  meta["final_psrf"] = detail::vec_json(s.final_psrf);
  meta["final_ess"] = detail::vec_json(s.final_ess);
  meta["mean_acceptance"] = s.mean_acceptance();
  Json chains = Json::array();
  for (const ChainRecord& c : s.chains) {
    Json j = Json::object();
    j["seed"] = c.seed;
    j["retained_draws"] = c.z.rows();
    j["acceptance"] = c.acceptance;
    j["failed"] = c.failed;
    if (c.failed) j["failure"] = c.failure;
    j["block_starts"] = c.block_starts;
    j["proposal_covariance"] = detail::mat_json(c.proposal_cov);
    chains.push_back(j);
  }
  meta["chains"] = chains;
  meta["n_blocks"] = s.blocks.size();
  for (const auto& [k, v] : extra.items()) meta[k] = v;
  auto os = open_out(dir / "meta.json");
  os << meta.dump(2) << '\n';
}

/// Thinned draws on the sampling scale and their trajectory seeds.
struct ThinnedDraws {
  std::vector<std::string> names;
  Matrix z;
  std::vector<std::uint64_t> seeds;
};

inline ThinnedDraws read_thinned(const fs::path& dir) {
  const fs::path p = dir / "thinned.csv";
  if (!fs::exists(p)) throw InputError("missing sample store file " + p.string() + " (run fit first)");
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  auto header = split_list(line);
  if (header.size() < 3 || header[0] != "index" || header[1] != "seed")
    throw InputError(p.string() + ": unexpected header");
  ThinnedDraws t;
  t.names.assign(header.begin() + 2, header.end());
  std::vector<std::vector<double>> rows;
  long n = 1;
  while (std::getline(in, line)) {
    ++n;
    auto f = split_list(line);
    if (f.empty()) continue;
    if (f.size() != header.size()) throw InputError(p.string() + ":" + std::to_string(n) + ": wrong field count");
    t.seeds.push_back(std::stoull(f[1]));
    std::vector<double> r;
    for (std::size_t k = 2; k < f.size(); ++k) {
      const auto v = detail::parse_double(f[k]);
      if (!v) throw InputError(p.string() + ":" + std::to_string(n) + ": not a number");
      r.push_back(*v);
    }
    rows.push_back(std::move(r));
  }
  t.z.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(t.names.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t k = 0; k < rows[i].size(); ++k) t.z(i, k) = rows[i][k];
  return t;
}

/// Long-format archive: draw, t, then one column per state component.
inline void write_trajectory_archive(const fs::path& p, const std::vector<Matrix>& traj, const ModelSpec& spec) {
  auto os = open_out(p);
  os << "draw,t";
  for (const auto& n : state_names(spec)) os << ',' << n;
  os << '\n';
  for (std::size_t j = 0; j < traj.size(); ++j)
    for (Eigen::Index i = 0; i < traj[j].rows(); ++i) {
      os << j + 1 << ',' << i + 1;
      for (Eigen::Index k = 0; k < traj[j].cols(); ++k) os << ',' << detail::fmt(traj[j](i, k));
      os << '\n';
    }
}

// ---------------------------------------------------------------------------
// Simulation output

inline Json hyper_json(const HyperParams& phi) {
  Json j = Json::object();
  HyperParams copy = phi;
  for (const auto& n : hyper_field_names()) j[n] = field_ref(copy, hyper_field_from_string(n));
  return j;
}

inline void write_simulation(const fs::path& dir, const SimTruth& s, Date start, const Json& extra = Json::object()) {
  ensure_dir(dir);
  DailySeries obs;
  obs.start = start;
  obs.values.assign(s.y.begin(), s.y.end());
  {
    auto os = open_out(dir / "observations.csv");
    write_series_csv(os, obs);
  }
  {
    auto os = open_out(dir / "latents.csv");
    write_latents_csv(os, s);
  }
  Json meta = Json::object();
  meta["scenario"] = to_string(s.scenario);
  meta["seed"] = s.seed;
  meta["length"] = s.length();
  meta["start_date"] = format_date(start);
  meta["model"] = {{"K", s.spec.harmonics},
                   {"P", s.spec.tvar_order},
                   {"intervention", to_string(s.spec.intervention)},
                   {"period_length", s.spec.period_length},
                   {"phase_origin", s.spec.phase_origin}};
  meta["params"] = hyper_json(s.params);
  meta["pacf_variance"] = s.pacf_variance;
  std::vector<double> th0(s.theta0.data(), s.theta0.data() + s.theta0.size());
  meta["theta0"] = detail::vec_json(th0);
  for (const auto& [k, v] : extra.items()) meta[k] = v;
  auto os = open_out(dir / "meta.json");
  os << meta.dump(2) << '\n';
}

}  // namespace icts

#endif  // ICTS_IO_HPP
