#ifndef ICTS_PIPELINE_HPP
#define ICTS_PIPELINE_HPP

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "icts/analysis.hpp"
#include "icts/bridge.hpp"
#include "icts/io.hpp"
#include "icts/mcmc.hpp"
#include "icts/model.hpp"
#include "icts/tvar_sim.hpp"

namespace icts {

/// Sub-seed streams derived from run.seed.
enum class SeedStream : std::uint64_t { Simulate = 11, Fit = 20, Bridge = 40, Analyze = 60, Forecast = 80 };

inline std::uint64_t stream_seed(const RunConfig& rc, SeedStream s, InterventionKind kind = InterventionKind::None) {
  return mix_seed(rc.seed(), static_cast<std::uint64_t>(s) + static_cast<std::uint64_t>(kind));
}

inline void write_resolved_config(const fs::path& dir, const RunConfig& rc) {
  ensure_dir(dir);
  auto os = open_out(dir / "resolved-config.txt");
  rc.raw.write_resolved(os);
}

inline Json spec_json(const ModelSpec& spec) {
  return {{"K", spec.harmonics},
          {"P", spec.tvar_order},
          {"intervention", to_string(spec.intervention)},
          {"period_length", spec.period_length},
          {"phase_origin", spec.phase_origin},
          {"T", spec.data_length}};
}

// ---------------------------------------------------------------------------
// simulate

inline SimTruth run_simulate(const RunConfig& rc, std::ostream& log = std::cerr) {
  const Scenario sc = rc.scenario();
  ModelSpec spec = rc.model_spec(scenario_kind(sc));
  spec.data_length = static_cast<int>(rc.raw.integer("sim.length"));
  const Date start = rc.sim_start();
  const std::string po = rc.raw.str("model.phase_origin");
  spec.phase_origin = po == "auto" ? phase_origin_for(start) : rc.raw.real("model.phase_origin");
  spec.validate();
  const StatePrior prior = rc.state_prior(spec, "sim.state_prior", false);
  const SimTruth truth = simulate_dataset(spec, rc.sim_params(), prior, sc, stream_seed(rc, SeedStream::Simulate),
                                          rc.initial_pacf(spec.tvar_order),
                                          pacf_scaling_from_string(rc.raw.str("sim.pacf_scaling")));
  const fs::path dir = rc.out_dir() / "sim";
  write_simulation(dir, truth, start);
  write_resolved_config(dir, rc);
  log << "simulate: " << to_string(sc) << " T=" << truth.length() << " -> " << dir.string() << '\n';
  return truth;
}

// ---------------------------------------------------------------------------
// fit

struct FitOutcome {
  DailySeries data;
  ModelSpec spec;
  StatePrior prior;
  ParameterSet params;
  SampleStore store;
  fs::path dir;
};

struct ModelInputs {
  DailySeries data;
  ModelSpec spec;
  StatePrior prior;
  ParameterSet params;
};

inline ModelInputs model_inputs(const RunConfig& rc, InterventionKind kind) {
  ModelInputs in;
  in.data = ingest_csv(rc.data_path());
  in.spec = rc.model_spec_for(in.data, kind);
  in.prior = rc.state_prior(in.spec);
  in.params = rc.parameters(kind);
  return in;
}

inline fs::path fit_dir(const RunConfig& rc, InterventionKind kind, const std::string& parent = "fit") {
  return rc.out_dir() / parent / to_string(kind);
}

/// Samples Phi, writes the store; the caller decides how to treat
/// non-convergence (store.converged).
inline FitOutcome fit_one(const RunConfig& rc, InterventionKind kind, const fs::path& dir, std::ostream& log) {
  ModelInputs in = model_inputs(rc, kind);
  log << "fit " << to_string(kind) << ": data " << in.data.summary() << '\n';
  const ModelPosterior post(in.data.values, in.spec, in.prior, in.params);
  FitOptions opt;
  opt.sampler = rc.sampler(stream_seed(rc, SeedStream::Fit, kind));
  opt.keep_trajectories = false;
  SampleStore store = fit_model(post, opt);

  const int n_arch = std::min<int>(static_cast<int>(rc.raw.integer("output.trajectory_archive")),
                                   static_cast<int>(store.thinned_index.size()));
  std::vector<Matrix> arch(std::max(n_arch, 0));
  parallel_for(static_cast<int>(arch.size()), [&](int j) {
    arch[j] = sample_state_trajectory(in.data.values, in.spec, in.prior, post.natural(store.thinned_z.row(j).transpose()),
                                      store.trajectory_seeds[j]);
  });

  Json extra = Json::object();
  extra["model"] = spec_json(in.spec);
  extra["data"] = {{"path", rc.data_path().string()},
                   {"T", in.data.length()},
                   {"missing", in.data.missing()},
                   {"start", format_date(in.data.start)}};
  write_sample_store(dir, store, extra);
  write_trajectory_archive(dir / "trajectories.csv", arch, in.spec);
  write_resolved_config(dir, rc);
  log << "fit " << to_string(kind) << ": " << (store.converged ? "converged" : "NOT converged") << " after "
      << store.blocks.size() << " blocks, acceptance " << store.mean_acceptance() << " -> " << dir.string() << '\n';
  return {std::move(in.data), in.spec, std::move(in.prior), std::move(in.params), std::move(store), dir};
}

inline FitOutcome run_fit(const RunConfig& rc, std::ostream& log = std::cerr) {
  const InterventionKind kind = rc.model_spec().intervention;
  FitOutcome out = fit_one(rc, kind, fit_dir(rc, kind), log);
  if (!out.store.converged)
    throw ConvergenceError("sampler did not converge within mcmc.max_blocks; partial outputs in " + out.dir.string());
  return out;
}

// ---------------------------------------------------------------------------
// compare

struct CompareOutcome {
  BridgeResult mean, autocorrelation;
  BayesFactor bf;
  bool converged = true;
};

inline BridgeResult bridge_for(const FitOutcome& f, std::uint64_t seed) {
  const ModelPosterior post(f.data.values, f.spec, f.prior, f.params);
  Rng rng(seed);
  return bridge_sampling_log_ml(f.store.pooled(false), [&](const Vector& z) { return post.log_density(z); }, rng,
                                f.store.pooled_log_post());
}

/// Fits the mean and autocorrelation models to the same series and reports
/// log B = log ML(mean) - log ML(autocorrelation).
inline CompareOutcome run_compare(const RunConfig& rc, std::ostream& log = std::cerr) {
  CompareOutcome out;
  const InterventionKind kinds[2] = {InterventionKind::Mean, InterventionKind::Autocorrelation};
  BridgeResult res[2];
  const fs::path dir = rc.out_dir() / "compare";
  for (int i = 0; i < 2; ++i) {
    const FitOutcome f = fit_one(rc, kinds[i], fit_dir(rc, kinds[i], "compare"), log);
    out.converged = out.converged && f.store.converged;
    try {
      res[i] = bridge_for(f, stream_seed(rc, SeedStream::Bridge, kinds[i]));
    } catch (const Error& e) {
      if (f.store.converged) throw;
      Json j = {{"converged", false}, {"failed_model", to_string(kinds[i])}, {"error", e.what()}};
      ensure_dir(dir);
      auto os = open_out(dir / "bayes_factor.json");
      os << j.dump(2) << '\n';
      write_resolved_config(dir, rc);
      throw ConvergenceError("sampler for the " + to_string(kinds[i]) +
                             " model did not converge and bridge sampling failed: " + e.what());
    }
    log << "compare: log ML " << to_string(kinds[i]) << " = " << res[i].log_ml << " (sd " << res[i].mc_sd() << ")\n";
  }
  out.mean = res[0];
  out.autocorrelation = res[1];
  out.bf = bayes_factor(res[0], res[1]);
  {
    auto os = open_out(dir / "bayes_factor.csv");
    write_bayes_factor_csv(os, out.bf, "mean", "autocorrelation");
  }
  Json j = Json::object();
  j["log_ml_mean"] = out.bf.log_ml_1;
  j["log_ml_autocorrelation"] = out.bf.log_ml_2;
  j["log_bayes_factor"] = out.bf.log_bf;
  j["bayes_factor"] = out.bf.bf();
  j["mc_sd_log_bayes_factor"] = out.bf.mc_sd;
  j["bridge_iterations"] = {res[0].iterations, res[1].iterations};
  j["converged"] = out.converged;
  {
    auto os = open_out(dir / "bayes_factor.json");
    os << j.dump(2) << '\n';
  }
  write_resolved_config(dir, rc);
  log << "compare: log B(mean vs autocorrelation) = " << out.bf.log_bf << " +- " << out.bf.mc_sd << '\n';
  if (!out.converged)
    throw ConvergenceError("at least one sampler did not converge; Bayes factor in " + dir.string() + " is flagged");
  return out;
}

// ---------------------------------------------------------------------------
// analyze

struct PosteriorSamples {
  ModelInputs in;
  ThinnedDraws thinned;
  std::vector<int> chosen;  // rows of thinned used
};

inline PosteriorSamples load_posterior(const RunConfig& rc, int n_samples) {
  const InterventionKind kind = rc.model_spec().intervention;
  const fs::path dir = fit_dir(rc, kind);
  if (!fs::exists(dir / "thinned.csv"))
    throw InputError("missing sample store " + (dir / "thinned.csv").string() + " (run fit first)");
  PosteriorSamples ps{model_inputs(rc, kind), read_thinned(dir), {}};
  if (ps.thinned.names != ps.in.params.names())
    throw InputError("sample store " + dir.string() + " was written for a different parameter set");
  if (ps.thinned.z.rows() == 0) throw InputError("sample store " + dir.string() + " has no thinned draws");
  ps.chosen = detail::equally_spaced(ps.thinned.z.rows(), n_samples);
  return ps;
}

struct AnalyzeOutcome {
  std::vector<std::pair<std::string, AnovaTable>> anova;
  std::vector<std::pair<std::string, ComponentMeans>> components;
  std::vector<std::pair<std::string, std::vector<Window>>> windows;
  PpcResult ppc;
};

inline void write_components_csv(std::ostream& os, const AnalyzeOutcome& a, const DailySeries& data) {
  os << "season_set,window,start_date,n,ybar";
  for (const char* c : {"eta", "eta_anom", "delta", "x", "v"}) os << ',' << c << "_mean," << c << "_lo95," << c << "_hi95";
  os << '\n' << std::setprecision(10);
  for (std::size_t s = 0; s < a.components.size(); ++s) {
    const ComponentMeans& cm = a.components[s].second;
    const auto& ws = a.windows[s].second;
    for (int i = 0; i < cm.n_windows(); ++i) {
      os << a.components[s].first << ',' << i + 1 << ',' << format_date(data.date(ws[i].front())) << ','
         << ws[i].size() << ',' << cm.samples[0][i].ybar;
      auto col = [&](auto get) {
        std::vector<double> v;
        for (const auto& smp : cm.samples) v.push_back(get(smp[i]));
        const Summary sm = summarise(v, 0.95);
        os << ',' << sm.mean << ',' << sm.lo << ',' << sm.hi;
      };
      col([](const WindowMeans& w) { return w.eta; });
      col([](const WindowMeans& w) { return w.eta_anom; });
      col([](const WindowMeans& w) { return w.delta; });
      col([](const WindowMeans& w) { return w.x; });
      col([](const WindowMeans& w) { return w.v; });
      os << '\n';
    }
  }
}

/// Attribution, ANOVA per season set and posterior predictive checks from
/// an existing fit. State trajectories are regenerated from the stored
/// seeds, so they equal those of the fit.
inline AnalyzeOutcome run_analyze(const RunConfig& rc, std::ostream& log = std::cerr) {
  const int n_samples = static_cast<int>(rc.raw.integer("analysis.n_samples"));
  const int n_ppc = static_cast<int>(rc.raw.integer("analysis.ppc_samples"));
  if (n_samples < 1 || n_ppc < 1) throw InputError("analysis.n_samples and analysis.ppc_samples must be >= 1");
  const double level = rc.raw.real("analysis.level");
  if (!(level > 0.0 && level < 1.0)) throw InputError("analysis.level must lie in (0, 1)");
  const long t0 = rc.raw.integer("analysis.ppc_start");
  const int max_lag = static_cast<int>(rc.raw.integer("analysis.max_lag"));
  if (max_lag < 0) throw InputError("analysis.max_lag must be >= 0");
  const auto sets = parse_season_sets(rc.raw.str("analysis.season_sets"));

  PosteriorSamples ps = load_posterior(rc, n_samples);
  const ModelInputs& in = ps.in;
  const long T = in.data.length();
  if (t0 < 1 || t0 > T) throw InputError("analysis.ppc_start lies outside 1..T");
  log << "analyze " << to_string(in.spec.intervention) << ": data " << in.data.summary() << ", " << ps.chosen.size()
      << " posterior draws\n";

  AnalyzeOutcome out;
  std::vector<std::vector<Window>> D(sets.size());
  for (std::size_t s = 0; s < sets.size(); ++s) {
    auto ws = season_windows(in.spec, T, sets[s].start_doy, sets[s].length);
    if (ws.size() < 2) throw InputError("season set " + sets[s].name + " has fewer than two complete windows");
    for (const auto& w : ws) D[s].push_back(comparison_set(w, in.spec, T));
    out.windows.emplace_back(sets[s].name, std::move(ws));
  }

  const int J = static_cast<int>(ps.chosen.size());
  const int J_ppc = std::min(J, n_ppc);
  std::vector<std::vector<std::vector<WindowMeans>>> means(J);  // [sample][set][window]
  std::vector<Vector> starts(J_ppc);
  std::vector<HyperParams> phis(J);
  parallel_for(J, [&](int j) {
    const int row = ps.chosen[j];
    phis[j] = in.params.natural(ps.thinned.z.row(row).transpose());
    const Matrix th = sample_state_trajectory(in.data.values, in.spec, in.prior, phis[j], ps.thinned.seeds[row]);
    const TvarModel model(in.spec, phis[j]);
    std::vector<double> lambda(T);
    for (long t = 1; t <= T; ++t) lambda[t - 1] = model.lambda(t);
    means[j].resize(sets.size());
    for (std::size_t s = 0; s < sets.size(); ++s)
      for (std::size_t i = 0; i < out.windows[s].second.size(); ++i)
        means[j][s].push_back(window_means(th, lambda, in.data.values, out.windows[s].second[i], D[s][i], in.spec));
    if (j < J_ppc && t0 > 1) starts[j] = th.row(t0 - 2).transpose();
  });

  for (std::size_t s = 0; s < sets.size(); ++s) {
    ComponentMeans cm;
    for (int j = 0; j < J; ++j) cm.samples.push_back(means[j][s]);
    out.anova.emplace_back(sets[s].name, anova(cm, level));
    out.components.emplace_back(sets[s].name, std::move(cm));
  }

  PpcInput pin;
  pin.prior = in.prior;
  pin.params.assign(phis.begin(), phis.begin() + J_ppc);
  if (t0 > 1) pin.start_states = starts;
  out.ppc = posterior_predictive_check(pin, in.data.values, in.spec, t0, T, max_lag,
                                       stream_seed(rc, SeedStream::Analyze), level);

  const fs::path dir = rc.out_dir() / "analysis";
  ensure_dir(dir);
  {
    auto os = open_out(dir / "anova.csv");
    write_anova_csv(os, out.anova, rc.raw.boolean("analysis.clamp_shares"));
  }
  {
    auto os = open_out(dir / "components.csv");
    write_components_csv(os, out, in.data);
  }
  {
    auto os = open_out(dir / "ppc_sd.csv");
    write_ppc_sd_csv(os, out.ppc);
  }
  {
    auto os = open_out(dir / "ppc_acf.csv");
    write_ppc_acf_csv(os, out.ppc);
  }
  write_resolved_config(dir, rc);
  for (const auto& [name, tab] : out.anova) {
    log << "analyze: " << name;
    for (int c = 0; c < 4; ++c) log << ' ' << kAnovaComponents[c] << '=' << tab.summary[c].mean;
    log << '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// forecast

inline std::vector<SkillRow> run_forecast(const RunConfig& rc, std::ostream& log = std::cerr) {
  const int n_samples = static_cast<int>(rc.raw.integer("forecast.n_samples"));
  const int paths = static_cast<int>(rc.raw.integer("forecast.paths"));
  if (n_samples < 1) throw InputError("forecast.n_samples must be >= 1");
  std::vector<int> init;
  for (const auto& s : split_list(rc.raw.str("forecast.init_dates"))) init.push_back(parse_month_day(s));
  if (init.empty()) throw InputError("forecast.init_dates is empty");
  const int end_doy = parse_month_day(rc.raw.str("forecast.end_date"));

  PosteriorSamples ps = load_posterior(rc, n_samples);
  std::vector<HyperParams> phis;
  for (int row : ps.chosen) phis.push_back(ps.in.params.natural(ps.thinned.z.row(row).transpose()));
  const auto rows = forecast_experiment(ps.in.data.values, ps.in.spec, ps.in.prior, phis, init, end_doy, paths,
                                        stream_seed(rc, SeedStream::Forecast));
  const fs::path dir = rc.out_dir() / "forecast";
  ensure_dir(dir);
  {
    auto os = open_out(dir / "skill.csv");
    write_skill_csv(os, rows);
  }
  {
    auto os = open_out(dir / "skill_detail.csv");
    write_skill_detail_csv(os, rows);
  }
  write_resolved_config(dir, rc);
  for (const auto& r : rows)
    log << "forecast: init " << month_day_label(r.init_doy) << " correlation " << r.correlation << " over "
        << r.n_years << " years\n";
  return rows;
}

enum class Command { Simulate, Fit, Compare, Analyze, Forecast };

inline Command command_from_string(const std::string& s) {
  if (s == "simulate") return Command::Simulate;
  if (s == "fit") return Command::Fit;
  if (s == "compare") return Command::Compare;
  if (s == "analyze") return Command::Analyze;
  if (s == "forecast") return Command::Forecast;
  throw InputError("unknown command '" + s + "'");
}

inline void run_pipeline(Command cmd, const RunConfig& rc, std::ostream& log = std::cerr) {
  switch (cmd) {
    case Command::Simulate: run_simulate(rc, log); break;
    case Command::Fit: run_fit(rc, log); break;
    case Command::Compare: run_compare(rc, log); break;
    case Command::Analyze: run_analyze(rc, log); break;
    case Command::Forecast: run_forecast(rc, log); break;
  }
}

}  // namespace icts

#endif  // ICTS_PIPELINE_HPP
