#ifndef ICTS_TVAR_SIM_HPP
#define ICTS_TVAR_SIM_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "icts/error.hpp"
#include "icts/model.hpp"
#include "icts/random.hpp"

namespace icts {

/// Maps partial autocorrelations rho_1..rho_P to AR(P) coefficients.
inline std::vector<double> durbin_levinson(const std::vector<double>& pacf) {
  const std::size_t P = pacf.size();
  for (std::size_t p = 0; p < P; ++p)
    if (!(std::abs(pacf[p]) < 1.0))
      throw DomainError("partial autocorrelation " + std::to_string(p + 1) +
                        " must lie strictly inside (-1, 1)");
  std::vector<double> phi(P), prev(P);
  for (std::size_t k = 0; k < P; ++k) {
    prev = phi;
    phi[k] = pacf[k];
    for (std::size_t j = 0; j < k; ++j) phi[j] = prev[j] - pacf[k] * prev[k - 1 - j];
  }
  return phi;
}

/// Folds x back into [-1, 1] by repeated reflection at the boundaries.
inline double reflect_unit(double x) {
  while (x > 1.0 || x < -1.0) x = x > 1.0 ? 2.0 - x : -2.0 - x;
  if (std::abs(x) == 1.0) x = std::nextafter(x, 0.0);
  return x;
}

/// Random-walk PACF paths; row i is time i + 1, column p is rho_{p+1}.
inline Matrix simulate_pacf_walk(double W_rho, const std::vector<double>& initial, int T, Rng& rng) {
  if (!(W_rho >= 0.0)) throw InputError("W_rho must be >= 0");
  const int P = static_cast<int>(initial.size());
  Matrix out(T, P);
  std::vector<double> cur = initial;
  const double sd = std::sqrt(W_rho);
  for (int t = 0; t < T; ++t)
    for (int p = 0; p < P; ++p) {
      if (sd > 0.0) cur[p] = reflect_unit(cur[p] + sd * standard_normal(rng));
      out(t, p) = cur[p];
    }
  return out;
}

/// How the simulation's coefficient variance W_phi drives the PACF walk.
/// Direct: W_rho = W_phi. Calibrated: W_rho is scaled so that the AR
/// coefficient increments have mean variance W_phi at the initial PACF,
/// using the Durbin-Levinson Jacobian.
enum class PacfScaling { Calibrated, Direct };

inline PacfScaling pacf_scaling_from_string(const std::string& s) {
  if (s == "calibrated") return PacfScaling::Calibrated;
  if (s == "direct") return PacfScaling::Direct;
  throw InputError("unknown PACF scaling '" + s + "' (expected calibrated|direct)");
}

inline std::string to_string(PacfScaling s) {
  return s == PacfScaling::Calibrated ? "calibrated" : "direct";
}

/// W_rho such that trace(J W_rho J') / P = W_phi, J = d phi / d rho.
inline double calibrated_pacf_variance(double W_phi, const std::vector<double>& pacf) {
  const std::size_t P = pacf.size();
  double fro = 0.0;
  for (std::size_t j = 0; j < P; ++j) {
    const double h = 1e-6 * std::max(1e-3, 1.0 - std::abs(pacf[j]));
    std::vector<double> up = pacf, dn = pacf;
    up[j] += h;
    dn[j] -= h;
    const std::vector<double> a = durbin_levinson(up), b = durbin_levinson(dn);
    for (std::size_t i = 0; i < P; ++i) {
      const double d = (a[i] - b[i]) / (2.0 * h);
      fro += d * d;
    }
  }
  return W_phi * static_cast<double>(P) / fro;
}

enum class Scenario { Basic, MeanIntervention, AutocorrIntervention };

inline std::string to_string(Scenario s) {
  switch (s) {
    case Scenario::Basic: return "basic";
    case Scenario::MeanIntervention: return "mean";
    case Scenario::AutocorrIntervention: return "autocorrelation";
  }
  return "basic";
}

inline Scenario scenario_from_string(const std::string& s) {
  if (s == "basic" || s == "none") return Scenario::Basic;
  if (s == "mean") return Scenario::MeanIntervention;
  if (s == "autocorrelation" || s == "autocorr") return Scenario::AutocorrIntervention;
  throw InputError("unknown simulation scenario '" + s + "'");
}

inline InterventionKind scenario_kind(Scenario s) {
  switch (s) {
    case Scenario::Basic: return InterventionKind::None;
    case Scenario::MeanIntervention: return InterventionKind::Mean;
    case Scenario::AutocorrIntervention: return InterventionKind::Autocorrelation;
  }
  return InterventionKind::None;
}

/// Simulation variances. The TVAR coefficients are driven by a PACF random
/// walk whose variance is derived from phi.W_phi (see PacfScaling).
inline HyperParams simulation_params(Scenario s, const std::string& preset = "fast") {
  if (preset != "fast" && preset != "slow")
    throw InputError("unknown simulation preset '" + preset + "' (expected fast|slow)");
  HyperParams phi;
  phi.V = 0.1 * 0.1;
  phi.W_mu = 0.1 * 0.1;
  phi.W_beta = 0.0001 * 0.0001;
  phi.W_psi = 0.1 * 0.1;
  phi.W_X = 5.0 * 5.0;
  phi.a = 0.0;
  phi.b = 0.0;
  phi.W_phi = preset == "fast" ? 0.015 * 0.015 : 0.0015 * 0.0015;
  phi.alpha = 320.0;
  phi.gamma = 90.0;
  phi.rho = 0.2;
  if (s == Scenario::MeanIntervention) {
    phi.W_delta = 0.5 * 0.5;
    phi.varphi = 0.995;
  } else {
    phi.W_delta = phi.W_phi;
    phi.varphi = 1.0;
  }
  return phi;
}

/// A stationary starting PACF for P lags; the leading values give a
/// persistent, damped-oscillation irregular component.
inline std::vector<double> default_initial_pacf(int P) {
  const double base[5] = {0.9, -0.5, 0.35, -0.1, 0.1};
  std::vector<double> out(P, 0.0);
  for (int p = 0; p < P && p < 5; ++p) out[p] = base[p];
  return out;
}

struct SimTruth {
  ModelSpec spec;
  HyperParams params;
  Scenario scenario = Scenario::Basic;
  std::uint64_t seed = 0;
  double pacf_variance = 0.0;
  Vector theta0;
  Matrix states;  // T x dim, row i is theta_{i+1}
  Matrix pacf;  // T x P
  std::vector<double> lambda;
  std::vector<double> v;  // observation noise
  std::vector<double> y;

  int length() const { return static_cast<int>(y.size()); }
};

/// Draws theta_0 from the prior (the TVAR block from the initial PACF),
/// drives the coefficients by a PACF walk and iterates the model forward.
inline SimTruth simulate_dataset(const ModelSpec& spec, const HyperParams& phi,
                                 const StatePrior& prior, Scenario scenario, std::uint64_t seed,
                                 const std::vector<double>& initial_pacf,
                                 PacfScaling scaling = PacfScaling::Calibrated) {
  if (scenario_kind(scenario) != spec.intervention)
    throw InputError("simulation scenario '" + to_string(scenario) +
                     "' does not match model intervention '" + to_string(spec.intervention) + "'");
  spec.validate();
  prior.validate(spec);
  const StateLayout L(spec);
  if (static_cast<int>(initial_pacf.size()) != L.P)
    throw InputError("initial PACF must have P entries");
  for (double w : {phi.V, phi.W_mu, phi.W_beta, phi.W_psi, phi.W_phi, phi.W_X, phi.W_delta})
    if (!(w >= 0.0)) throw InputError("simulation variances must be >= 0");

  const int T = spec.data_length;
  SimTruth out;
  out.spec = spec;
  out.params = phi;
  out.scenario = scenario;
  out.seed = seed;

  Rng rng(seed);
  Rng walk_rng(mix_seed(seed, 1));
  Vector theta = prior.mean;
  for (int i = 0; i < L.dim(); ++i) theta[i] += std::sqrt(prior.variance[i]) * standard_normal(rng);
  std::vector<double> ar = durbin_levinson(initial_pacf);
  for (int p = 0; p < L.P; ++p) theta[L.phi(p)] = ar[p];
  out.theta0 = theta;

  out.pacf_variance = scaling == PacfScaling::Direct
                          ? phi.W_phi
                          : calibrated_pacf_variance(phi.W_phi, initial_pacf);
  out.pacf = simulate_pacf_walk(out.pacf_variance, initial_pacf, T, walk_rng);
  out.lambda = spec.intervention == InterventionKind::None
                   ? std::vector<double>(T, 0.0)
                   : build_intervention_profile(phi.alpha, phi.gamma, phi.rho, spec.period_length,
                                                T, spec.phase_origin);
  out.states.resize(T, L.dim());
  out.v.resize(T);
  out.y.resize(T);
  const double vsd = std::sqrt(phi.V);
  std::vector<double> pac(L.P);
  for (int i = 0; i < T; ++i) {
    const long t = i + 1;
    Vector wsd = evolution_noise_variances(t, spec, phi).cwiseMax(0.0).cwiseSqrt();
    Vector w(L.noise_dim());
    for (int j = 0; j < w.size(); ++j) w[j] = wsd[j] * standard_normal(rng);
    for (int p = 0; p < L.P; ++p) pac[p] = out.pacf(i, p);
    ar = durbin_levinson(pac);
    for (int p = 0; p < L.P; ++p) w[L.w_phi(p)] = ar[p] - theta[L.phi(p)];
    theta = evolution_fn(theta, w, spec, phi);
    out.states.row(i) = theta.transpose();
    out.v[i] = vsd * standard_normal(rng);
    out.y[i] = observation_fn(theta, out.v[i], out.lambda[i], spec);
    if (!std::isfinite(out.y[i]))
      throw NumericalFailure("simulation produced a non-finite value", t);
  }
  return out;
}

inline SimTruth simulate_dataset(const ModelSpec& spec, const HyperParams& phi,
                                 const StatePrior& prior, Scenario scenario, std::uint64_t seed) {
  return simulate_dataset(spec, phi, prior, scenario, seed, default_initial_pacf(spec.tvar_order));
}

/// Column names of the state layout, used for latents.csv and trajectories.
inline std::vector<std::string> state_names(const ModelSpec& spec) {
  const StateLayout L(spec);
  std::vector<std::string> names(L.dim());
  names[L.mu()] = "mu";
  names[L.beta()] = "beta";
  for (int k = 0; k < L.K; ++k) {
    names[L.psi(k)] = "psi" + std::to_string(k + 1);
    names[L.psi_star(k)] = "psistar" + std::to_string(k + 1);
  }
  for (int l = 0; l < L.n_lags(); ++l) names[L.x(l)] = l == 0 ? "X" : "X_lag" + std::to_string(l);
  for (int p = 0; p < L.P; ++p) names[L.phi(p)] = "phi" + std::to_string(p + 1);
  if (L.kind == InterventionKind::Mean) names[L.delta()] = "delta";
  for (int p = 0; L.kind == InterventionKind::Autocorrelation && p < L.P; ++p)
    names[L.delta(p)] = "delta" + std::to_string(p + 1);
  return names;
}

/// t, lambda, v, y, then every state component and the PACF paths.
inline void write_latents_csv(std::ostream& os, const SimTruth& s) {
  const std::vector<std::string> names = state_names(s.spec);
  os << "t,lambda,v,y";
  for (const auto& n : names) os << ',' << n;
  for (int p = 0; p < s.pacf.cols(); ++p) os << ",pacf" << p + 1;
  os << '\n';
  os.precision(17);
  for (int i = 0; i < s.length(); ++i) {
    os << i + 1 << ',' << s.lambda[i] << ',' << s.v[i] << ',' << s.y[i];
    for (int j = 0; j < s.states.cols(); ++j) os << ',' << s.states(i, j);
    for (int p = 0; p < s.pacf.cols(); ++p) os << ',' << s.pacf(i, p);
    os << '\n';
  }
}

}  // namespace icts

#endif  // ICTS_TVAR_SIM_HPP
