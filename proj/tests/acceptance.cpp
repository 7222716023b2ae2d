// Acceptance suite: one PASS/FAIL line per criterion.
// Usage: acceptance [criterion numbers...]   (default: all)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "icts/analysis.hpp"
#include "icts/bridge.hpp"
#include "icts/diagnostics.hpp"
#include "icts/filter.hpp"
#include "icts/mcmc.hpp"
#include "icts/model.hpp"
#include "icts/pipeline.hpp"
#include "icts/tvar_sim.hpp"
#include "test_support.hpp"

using namespace icts;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string num(double v, int prec = 4) {
  std::ostringstream os;
  os << std::setprecision(prec) << v;
  return os.str();
}

double scaled_diff(double a, double b) { return std::abs(a - b) / (1.0 + std::abs(b)); }

std::ostringstream quiet;

// ---------------------------------------------------------------------------
// 1. linear oracle

HyperParams linear_params() {
  HyperParams phi;
  phi.V = 0.5;
  phi.W_mu = 1e-3;
  phi.W_beta = 1e-8;
  phi.W_psi = 1e-3;
  phi.W_phi = 0.0;
  phi.W_X = 1.0;
  phi.a = 0.3;
  phi.b = 0.4;
  phi.alpha = 330.0;
  phi.gamma = 90.0;
  phi.rho = 0.2;
  phi.varphi = 0.9;
  phi.W_delta = 0.01;
  return phi;
}

Outcome linear_oracle() {
  const std::vector<double> ar = {0.6, -0.2, 0.1, 0.05, -0.05};
  const int T = 50;
  double moment_err = 0.0, ll_err = 0.0;
  int max_dim = 0;
  for (auto kind : {InterventionKind::None, InterventionKind::Mean}) {
    ModelSpec spec;
    spec.intervention = kind;
    spec.data_length = T;
    spec.phase_origin = 300.0;
    const HyperParams phi = linear_params();
    StatePrior prior = StatePrior::informative(spec);
    const StateLayout L(spec);
    max_dim = std::max(max_dim, L.dim());
    for (int p = 0; p < L.P; ++p) {
      prior.mean[L.phi(p)] = ar[p];
      prior.variance[L.phi(p)] = 0.0;
    }
    Rng rng(11);
    std::vector<double> y(T);
    for (int t = 0; t < T; ++t) y[t] = 6.0 + 3.0 * std::sin(0.1 * t) + standard_normal(rng);
    const Series ys(y.begin(), y.end());

    const FilterResult fr = forward_filter(ys, phi, spec, prior);
    const auto mdl = oracle::make_reduced_model(spec, phi, ar, prior, T);
    const auto dense = oracle::dense_kalman(mdl, y);
    const auto& idx = mdl.full_index;
    const int n = mdl.n;
    for (int t = 1; t <= T; ++t)
      for (int i = 0; i < n; ++i) {
        moment_err = std::max(moment_err, scaled_diff(fr.at(t).m[idx[i]], dense.m[t - 1][i]));
        for (int j = 0; j < n; ++j)
          moment_err = std::max(moment_err, scaled_diff(fr.at(t).C(idx[i], idx[j]), dense.C[t - 1](i, j)));
      }

    const auto J = oracle::joint_gaussian(mdl, T);
    const Eigen::Map<const Vector> yv(y.data(), T);
    ll_err = std::max(ll_err, std::abs(fr.log_marginal_likelihood - oracle::mvn_logpdf(yv, J.mean_y, J.cov_y)));

    BackwardSampler bs(fr, phi, spec);
    std::vector<Vector> mean;
    std::vector<Matrix> cov;
    bs.moments(mean, cov);
    Eigen::LDLT<Matrix> ldlt(J.cov_y);
    const Vector cm = J.mean_theta + J.cov_theta_y * ldlt.solve(yv - J.mean_y);
    const Matrix cc = J.cov_theta - J.cov_theta_y * ldlt.solve(J.cov_theta_y.transpose());
    for (int t = 0; t < T; ++t)
      for (int i = 0; i < n; ++i) {
        moment_err = std::max(moment_err, scaled_diff(mean[t][idx[i]], cm[t * n + i]));
        for (int j = 0; j < n; ++j)
          moment_err = std::max(moment_err, scaled_diff(cov[t](idx[i], idx[j]), cc(t * n + i, t * n + j)));
      }
  }
  return {moment_err < 1e-9 && ll_err < 1e-8 && max_dim <= 17,
          "max moment error " + num(moment_err) + " (< 1e-9), log ML error " + num(ll_err) + " (< 1e-8), dim " +
              std::to_string(max_dim)};
}

// ---------------------------------------------------------------------------
// 2. scalar fixtures

Outcome scalar_fixtures() {
  auto model = LinearGaussianModel::local_level(1.0, 1.0);
  const FilterResult fr = forward_filter(Series{1.0}, model, Vector::Zero(1), Matrix::Ones(1, 1));
  const double ll_exact = -0.5 * (std::log(2 * std::numbers::pi * 3.0) + 1.0 / 3.0);
  const double e1 = std::max({std::abs(fr.at(1).m[0] - 2.0 / 3.0), std::abs(fr.at(1).C(0, 0) - 2.0 / 3.0),
                              std::abs(fr.log_marginal_likelihood - ll_exact)});
  const auto dl = durbin_levinson({0.5, 0.2});
  const double e2 = std::max(std::abs(dl[0] - 0.4), std::abs(dl[1] - 0.2));
  const bool rounded = std::abs(fr.log_marginal_likelihood - (-1.63491)) < 5e-6;
  return {e1 < 1e-10 && e2 < 1e-10 && rounded,
          "local level m1=" + num(fr.at(1).m[0], 12) + " C1=" + num(fr.at(1).C(0, 0), 12) +
              " loglik=" + num(fr.log_marginal_likelihood, 8) + " (err " + num(e1) + "); DL P=2 (" +
              num(dl[0], 12) + ", " + num(dl[1], 12) + ") err " + num(e2)};
}

// ---------------------------------------------------------------------------
// 3. Jacobians

Outcome jacobians_fd() {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (auto kind : {InterventionKind::None, InterventionKind::Mean, InterventionKind::Autocorrelation}) {
    ModelSpec spec;
    spec.intervention = kind;
    spec.data_length = 100;
    const StateLayout L(spec);
    for (int rep = 0; rep < 10; ++rep) {
      HyperParams p;
      p.V = 0.1 + u(rng);
      p.W_mu = 0.1 * u(rng);
      p.W_beta = 0.01 * u(rng);
      p.W_psi = 0.1 * u(rng);
      p.W_phi = 0.01 * u(rng);
      p.W_X = 0.5 + u(rng);
      p.a = u(rng) - 0.5;
      p.b = u(rng);
      p.alpha = 300.0 * u(rng);
      p.gamma = 20.0 + 100.0 * u(rng);
      p.rho = u(rng);
      p.varphi = u(rng);
      p.W_delta = 0.1 * u(rng);
      Vector s(L.dim());
      for (int i = 0; i < s.size(); ++i) s[i] = 3.0 * (2.0 * u(rng) - 1.0);
      const double lambda = 0.7;
      const Jacobians J = jacobians(s, spec, p, lambda);
      const Vector w0 = Vector::Zero(L.noise_dim());
      const double h = 1e-5;
      auto rel = [](double fd, double an) { return std::abs(fd - an) / std::max(1.0, std::abs(an)); };
      for (int j = 0; j < L.dim(); ++j) {
        Vector sp = s, sm = s;
        sp[j] += h;
        sm[j] -= h;
        const Vector dg = (evolution_fn(sp, w0, spec, p) - evolution_fn(sm, w0, spec, p)) / (2 * h);
        for (int i = 0; i < L.dim(); ++i) worst = std::max(worst, rel(dg[i], J.G(i, j)));
        const double df = (observation_fn(sp, 0, lambda, spec) - observation_fn(sm, 0, lambda, spec)) / (2 * h);
        worst = std::max(worst, rel(df, J.F[j]));
      }
      for (int j = 0; j < L.noise_dim(); ++j) {
        Vector wp = w0, wm = w0;
        wp[j] += h;
        wm[j] -= h;
        const Vector dg = (evolution_fn(s, wp, spec, p) - evolution_fn(s, wm, spec, p)) / (2 * h);
        for (int i = 0; i < L.dim(); ++i) worst = std::max(worst, rel(dg[i], J.H(i, j)));
      }
      const double dv = (observation_fn(s, h, lambda, spec) - observation_fn(s, -h, lambda, spec)) / (2 * h);
      worst = std::max(worst, rel(dv, J.J));
    }
  }
  return {worst < 1e-6, "max relative error " + num(worst) + " over G, H, F, J, 3 variants x 10 states"};
}

// ---------------------------------------------------------------------------
// 4. tracking on the basic model

// Coverage is pooled over replicate simulations: single-seed rates for mu
// range from about 0.1 to 1.0, so one draw says little.
Outcome simulation_tracking() {
  ModelSpec spec;
  spec.intervention = InterventionKind::None;
  spec.period_length = 365.0;
  spec.phase_origin = -1.0;
  spec.data_length = 10 * 365;
  const HyperParams phi = simulation_params(Scenario::Basic, "fast");
  const StatePrior prior = StatePrior::vague(spec);
  const StateLayout L(spec);
  std::vector<int> comps = {L.mu()};
  for (int p = 0; p < L.P; ++p) comps.push_back(L.phi(p));
  const int n_rep = 20;
  const long burn = 365;
  std::vector<long> hit(comps.size(), 0);
  long n = 0;
  int seeds_ok = 0;
  for (int rep = 1; rep <= n_rep; ++rep) {
    const SimTruth truth = simulate_dataset(spec, phi, prior, Scenario::Basic, mix_seed(404, rep));
    const Series y(truth.y.begin(), truth.y.end());
    const FilterResult fr = forward_filter(y, phi, spec, prior);
    bool all = true;
    for (std::size_t k = 0; k < comps.size(); ++k) {
      const int c = comps[k];
      long h = 0;
      for (long t = burn + 1; t <= spec.data_length; ++t) {
        const FilterStep& s = fr.at(t);
        const double half = 1.959963984540054 * std::sqrt(std::max(s.C(c, c), 0.0));
        h += std::abs(truth.states(t - 1, c) - s.m[c]) <= half;
      }
      hit[k] += h;
      all = all && h >= 0.85 * (spec.data_length - burn);
    }
    n += spec.data_length - burn;
    seeds_ok += all;
  }
  std::vector<double> rate;
  for (long h : hit) rate.push_back(static_cast<double>(h) / n);
  std::string d = "pooled coverage over " + std::to_string(n_rep) + " simulations: mu " + num(rate[0], 3);
  for (int p = 0; p < L.P; ++p) d += ", phi" + std::to_string(p + 1) + " " + num(rate[p + 1], 3);
  const bool ok = std::all_of(rate.begin(), rate.end(), [](double r) { return r >= 0.85; });
  return {ok, d + " (each >= 0.85); " + std::to_string(seeds_ok) + "/" + std::to_string(n_rep) +
                  " single simulations meet it for every component"};
}

// ---------------------------------------------------------------------------
// shared simulation world for 5 and 6: the specified coupling settings with
// a quasi-static level and seasonal cycle and unit irregular variance

struct World {
  ModelSpec spec;
  HyperParams phi;
  SimTruth truth;
  Series y;
};

World coupling_world(Scenario sc, int years, std::uint64_t seed) {
  World w;
  w.spec.intervention = scenario_kind(sc);
  w.spec.period_length = 365.0;
  w.spec.phase_origin = -1.0;
  w.spec.data_length = years * 365;
  w.phi = simulation_params(sc, "slow");
  w.phi.W_mu = w.phi.W_psi = std::exp(-12.0);
  w.phi.W_beta = std::exp(-28.0);
  w.phi.W_phi = 0.0;
  w.phi.W_X = 1.0;
  StatePrior sim_prior = StatePrior::vague(w.spec);
  sim_prior.variance[StateLayout(w.spec).beta()] = 0.0;
  w.truth = simulate_dataset(w.spec, w.phi, sim_prior, sc, seed, default_initial_pacf(w.spec.tvar_order));
  w.y.assign(w.truth.y.begin(), w.truth.y.end());
  return w;
}

SamplerConfig reduced_budget(int chains, int block, int max_blocks, int n_states, std::uint64_t seed) {
  SamplerConfig c;
  c.chains = chains;
  c.block_size = block;
  c.max_blocks = max_blocks;
  c.n_state_samples = n_states;
  c.seed = seed;
  return c;
}

std::string budget_note(const SampleStore& s) {
  return std::to_string(s.blocks.size()) + " blocks, " + (s.converged ? "converged" : "budget-capped") +
         ", acceptance " + num(s.mean_acceptance(), 3);
}

// ---------------------------------------------------------------------------
// 5. mean-effect recovery

Outcome mean_effect_recovery() {
  const World w = coupling_world(Scenario::MeanIntervention, 31, 505);
  const StatePrior prior = StatePrior::informative(w.spec);
  const ParameterSet ps = ParameterSet::informative(InterventionKind::Mean);
  const ModelPosterior post(w.y, w.spec, prior, ps);
  FitOptions opt;
  opt.sampler = reduced_budget(4, 500, 4, 100, 506);
  opt.keep_trajectories = true;
  const SampleStore store = fit_model(post, opt);

  const long T = w.spec.data_length;
  const auto windows =
      season_windows(w.spec, T, static_cast<int>(w.phi.alpha), static_cast<int>(w.phi.gamma));
  auto count_inside = [&](const ComponentMeans& cm) {
    int inside = 0;
    for (std::size_t i = 0; i < windows.size(); ++i) {
      const double truth = window_means(w.truth.states, w.truth.lambda, w.y, windows[i], {}, w.spec).delta;
      std::vector<double> draws;
      for (const auto& s : cm.samples) draws.push_back(s[i].delta);
      inside += truth >= sample_quantile(draws, 0.025) && truth <= sample_quantile(draws, 0.975);
    }
    return inside;
  };
  std::vector<Matrix> trajs;
  std::vector<std::vector<double>> lambdas;
  for (std::size_t j = 0; j < store.trajectories.size(); ++j) {
    const TvarModel model(w.spec, post.natural(store.thinned_z.row(j).transpose()));
    std::vector<double> lam(T);
    for (long t = 1; t <= T; ++t) lam[t - 1] = model.lambda(t);
    trajs.push_back(store.trajectories[j]);
    lambdas.push_back(std::move(lam));
  }
  const int inside = count_inside(component_means(trajs, lambdas, w.y, windows, w.spec));

  // diagnostic only: the same count with states sampled under the simulation Phi
  const FilterResult fr = forward_filter(w.y, w.phi, w.spec, prior);
  BackwardSampler bs(fr, w.phi, w.spec);
  Rng rng(507);
  std::vector<Matrix> fixed;
  for (int j = 0; j < 100; ++j) fixed.push_back(bs.sample(rng));
  const std::vector<std::vector<double>> true_lambda(fixed.size(), w.truth.lambda);
  const int inside_fixed = count_inside(component_means(fixed, true_lambda, w.y, windows, w.spec));

  const int n = static_cast<int>(windows.size());
  return {n == 30 && inside >= 26, std::to_string(inside) + "/" + std::to_string(n) +
                                       " seasons inside the 95% interval (>= 26/30); " + budget_note(store) +
                                       "; diagnostic with the simulation Phi: " + std::to_string(inside_fixed) + "/" +
                                       std::to_string(n)};
}

// ---------------------------------------------------------------------------
// 6. model recovery by bridge sampling

double fit_log_ml(const Series& y, const ModelSpec& base, InterventionKind kind, std::uint64_t seed,
                  std::string& note) {
  ModelSpec spec = base;
  spec.intervention = kind;
  const ModelPosterior post(y, spec, StatePrior::informative(spec), ParameterSet::informative(kind));
  FitOptions opt;
  opt.sampler = reduced_budget(4, 250, 6, 0, seed);
  opt.keep_trajectories = false;
  const SampleStore store = fit_model(post, opt);
  Rng rng(mix_seed(seed, 1));
  const BridgeResult r = bridge_sampling_log_ml(
      store.pooled(false), [&](const Vector& z) { return post.log_density(z); }, rng, store.pooled_log_post());
  note += " [" + to_string(kind) + ": " + budget_note(store) + "]";
  return r.log_ml;
}

Outcome model_recovery() {
  std::string note;
  const World wm = coupling_world(Scenario::MeanIntervention, 10, 606);
  const double bm = fit_log_ml(wm.y, wm.spec, InterventionKind::Mean, 607, note) -
                    fit_log_ml(wm.y, wm.spec, InterventionKind::Autocorrelation, 608, note);
  const World wa = coupling_world(Scenario::AutocorrIntervention, 10, 616);
  const double ba = fit_log_ml(wa.y, wa.spec, InterventionKind::Mean, 617, note) -
                    fit_log_ml(wa.y, wa.spec, InterventionKind::Autocorrelation, 618, note);
  return {bm > 0.0 && ba < 0.0,
          "log B on mean data " + num(bm) + " (> 0), on autocorrelation data " + num(ba) + " (< 0);" + note};
}

// ---------------------------------------------------------------------------
// 7. bridge sampler on a conjugate model

Outcome bridge_conjugate() {
  Rng data_rng(1);
  std::vector<double> y;
  for (int i = 0; i < 30; ++i) y.push_back(1.3 + standard_normal(data_rng));
  const double sigma = 1.0, mu0 = 0.5, tau0 = 2.0;
  const int n = static_cast<int>(y.size());
  auto log_post = [&](const Vector& z) {
    double s = 0.0;
    for (double v : y) s += -0.5 * (v - z[0]) * (v - z[0]) / (sigma * sigma);
    s -= n * (std::log(sigma) + 0.5 * std::log(2 * std::numbers::pi));
    const double u = (z[0] - mu0) / tau0;
    return s - 0.5 * u * u - std::log(tau0) - 0.5 * std::log(2 * std::numbers::pi);
  };
  const Matrix S = sigma * sigma * Matrix::Identity(n, n) + tau0 * tau0 * Matrix::Ones(n, n);
  Vector r(n);
  for (int i = 0; i < n; ++i) r[i] = y[i] - mu0;
  const double exact = oracle::mvn_logpdf(r, Vector::Zero(n), S);

  const double prec = 1.0 / (tau0 * tau0) + n / (sigma * sigma);
  double sum = 0.0;
  for (double v : y) sum += v;
  const double m = (mu0 / (tau0 * tau0) + sum / (sigma * sigma)) / prec;
  Rng rng(2);
  Matrix draws(2000, 1);
  for (int i = 0; i < 2000; ++i) draws(i, 0) = m + standard_normal(rng) / std::sqrt(prec);
  const BridgeResult b = bridge_sampling_log_ml(draws, log_post, rng);
  const double err = std::abs(b.log_ml - exact);
  return {err < 0.05,
          "estimate " + num(b.log_ml, 8) + " vs closed form " + num(exact, 8) + ", error " + num(err) + " (< 0.05)"};
}

// ---------------------------------------------------------------------------
// 8. sampler protocol on the full model

Outcome sampler_protocol() {
  const World w = coupling_world(Scenario::MeanIntervention, 5, 808);
  const StatePrior prior = StatePrior::informative(w.spec);
  // hand-chosen initial proposal: wider steps for the weakly identified log-variances
  ParameterSet ps = ParameterSet::informative(InterventionKind::Mean);
  for (const char* name : {"logWmu", "logWbeta", "logWphi", "logWdelta"}) ps.at(name).proposal_variance = 0.25;
  const ModelPosterior post(w.y, w.spec, prior, ps);
  FitOptions opt;
  opt.sampler = reduced_budget(4, 1000, 40, 0, 809);
  opt.keep_trajectories = false;
  const SampleStore s = fit_model(post, opt);
  double lo_acc = 1.0, hi_acc = 0.0;
  for (auto* c : s.active_chains()) {
    lo_acc = std::min(lo_acc, c->acceptance);
    hi_acc = std::max(hi_acc, c->acceptance);
  }
  const double max_psrf = s.final_psrf.empty() ? INFINITY : *std::max_element(s.final_psrf.begin(), s.final_psrf.end());
  const double min_ess = s.final_ess.empty() ? 0.0 : *std::min_element(s.final_ess.begin(), s.final_ess.end());
  const bool ok = s.converged && s.retained_phase == 3 && lo_acc >= 0.15 && hi_acc <= 0.45 && max_psrf < 1.1 &&
                  min_ess > 1000.0;
  return {ok, std::string(s.converged ? "terminated" : "budget exhausted") + " after " +
                  std::to_string(s.blocks.size()) + " blocks; acceptance " + num(lo_acc, 3) + ".." +
                  num(hi_acc, 3) + " (in [0.15, 0.45]); max PSRF " + num(max_psrf) + " (< 1.1); min ESS " +
                  num(min_ess) + " (> 1000)"};
}

// ---------------------------------------------------------------------------
// 9. diagnostics fixtures

Outcome diagnostics_fixtures() {
  Rng rng(1);
  std::vector<double> c(1000);
  for (double& v : c) v = standard_normal(rng);
  const double psrf = gelman_rubin({c, c, c, c});
  const double psrf_err = std::abs(psrf - std::sqrt(999.0 / 1000.0));
  Rng rng2(5);
  std::vector<double> x(100000);
  double cur = standard_normal(rng2) / std::sqrt(1.0 - 0.81);
  for (double& v : x) {
    cur = 0.9 * cur + standard_normal(rng2);
    v = cur;
  }
  const double ratio = effective_sample_size(x) / 1e5 / ((1.0 - 0.9) / (1.0 + 0.9));
  return {psrf_err < 1e-12 && std::abs(ratio - 1.0) < 0.2,
          "identical-chain PSRF " + num(psrf, 10) + " (sqrt(0.999), err " + num(psrf_err) +
              "); AR(1) ESS/n relative to 0.0526: " + num(ratio, 4) + " (within 20%)"};
}

// ---------------------------------------------------------------------------
// 10. decomposition exactness

Outcome decomposition_exactness() {
  double worst_sum = 0.0, worst_share = 0.0;
  for (auto kind : {InterventionKind::None, InterventionKind::Mean, InterventionKind::Autocorrelation}) {
    ModelSpec spec;
    spec.intervention = kind;
    spec.period_length = 20.0;
    spec.phase_origin = 0.0;
    spec.data_length = 200;
    const StateLayout L(spec);
    Rng rng(mix_seed(1010, static_cast<std::uint64_t>(kind)));
    std::vector<Matrix> trajs;
    std::vector<std::vector<double>> lams;
    for (int j = 0; j < 5; ++j) {
      Matrix th(spec.data_length, L.dim());
      for (long i = 0; i < th.size(); ++i) th.data()[i] = standard_normal(rng);
      std::vector<double> lam(spec.data_length);
      for (double& l : lam) l = std::abs(standard_normal(rng));
      trajs.push_back(th);
      lams.push_back(lam);
    }
    Series y(spec.data_length);
    for (auto& v : y) v = 3.0 * standard_normal(rng);
    y[7].reset();
    const auto windows = season_windows(spec, spec.data_length, 3, 6);
    const ComponentMeans cm = component_means(trajs, lams, y, windows, spec);
    for (const auto& s : cm.samples)
      for (const auto& m : s) worst_sum = std::max(worst_sum, std::abs(m.ybar - (m.eta + m.delta + m.x + m.v)));
    const AnovaTable tab = anova(cm);
    for (const auto& sh : tab.shares) worst_share = std::max(worst_share, std::abs(sh[0] + sh[1] + sh[2] + sh[3] - 1.0));
  }
  return {worst_sum < 1e-12 && worst_share < 1e-12,
          "max |ybar - (eta+delta+X+v)| " + num(worst_sum) + ", max |sum of shares - 1| " + num(worst_share)};
}

// ---------------------------------------------------------------------------
// 11. determinism of every pipeline command

std::map<std::string, std::string> snapshot(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    out[fs::relative(e.path(), root).string()] = os.str();
  }
  return out;
}

void run_every_command(const RunConfig& rc) {
  for (Command c : {Command::Simulate, Command::Fit, Command::Compare, Command::Analyze, Command::Forecast}) {
    try {
      run_pipeline(c, rc, quiet);
    } catch (const ConvergenceError&) {
      // expected at this budget; outputs are still written
    }
  }
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "icts_acceptance_determinism";
  const fs::path out = root / "out";
  fs::remove_all(root);
  const RunConfig rc = load_run_config(
      std::nullopt, {"sim.scenario=mean", "sim.preset=slow", "sim.length=1500", "model.period_length=365",
                     "model.intervention=mean", "mcmc.chains=2", "mcmc.block_size=60", "mcmc.max_blocks=3",
                     "mcmc.n_state_samples=8", "analysis.n_samples=6", "analysis.ppc_samples=4",
                     "forecast.n_samples=3", "forecast.paths=3", "output.dir=" + out.string(),
                     "data.path=" + (out / "sim" / "observations.csv").string()});
  run_every_command(rc);
  const auto first = snapshot(out);
  fs::remove_all(out);
  run_every_command(rc);
  const auto second = snapshot(out);
  fs::remove_all(root);
  int differ = 0;
  std::string which;
  for (const auto& [k, v] : first) {
    const auto it = second.find(k);
    if (it == second.end() || it->second != v) {
      ++differ;
      which += " " + k;
    }
  }
  const bool ok = differ == 0 && first.size() == second.size() && !first.empty();
  return {ok, std::to_string(first.size()) + " output files from simulate, fit, compare, analyze, forecast; " +
                  std::to_string(differ) + " differ" + which};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"linear-oracle equivalence", linear_oracle},
      {"scalar fixtures", scalar_fixtures},
      {"Jacobians vs finite differences", jacobians_fd},
      {"simulation tracking", simulation_tracking},
      {"mean-effect recovery", mean_effect_recovery},
      {"model recovery", model_recovery},
      {"bridge sampler oracle", bridge_conjugate},
      {"sampler protocol", sampler_protocol},
      {"diagnostics fixtures", diagnostics_fixtures},
      {"decomposition exactness", decomposition_exactness},
      {"determinism", determinism},
  };
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::stoi(argv[i]));
  if (selected.empty())
    for (int i = 1; i <= static_cast<int>(criteria.size()); ++i) selected.push_back(i);

  int failed = 0;
  for (int id : selected) {
    if (id < 1 || id > static_cast<int>(criteria.size())) {
      std::cerr << "unknown criterion " << id << '\n';
      return 2;
    }
    const auto& [name, fn] = criteria[id - 1];
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << id << " (" << name << "): " << o.detail << " ["
              << num(secs, 3) << " s]" << std::endl;
  }
  std::cout << (failed ? std::to_string(failed) + " criteria failed" : "all criteria passed") << std::endl;
  return failed ? 1 : 0;
}
