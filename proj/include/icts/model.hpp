#ifndef ICTS_MODEL_HPP
#define ICTS_MODEL_HPP

#include <cmath>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "icts/error.hpp"

namespace icts {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class InterventionKind { None, Mean, Autocorrelation };

inline std::string to_string(InterventionKind kind) {
  switch (kind) {
    case InterventionKind::None: return "none";
    case InterventionKind::Mean: return "mean";
    case InterventionKind::Autocorrelation: return "autocorrelation";
  }
  return "none";
}

inline InterventionKind intervention_kind_from_string(const std::string& s) {
  if (s == "none") return InterventionKind::None;
  if (s == "mean") return InterventionKind::Mean;
  if (s == "autocorrelation" || s == "autocorr") return InterventionKind::Autocorrelation;
  throw InputError("unknown intervention kind '" + s + "' (expected none|mean|autocorrelation)");
}

/// Structural configuration of the model.
///
/// Model time t = 1..T maps onto seasonal time s = t + phase_origin, which is
/// what the harmonic terms, the irregular variance cycle and the intervention
/// profile see. The CLI sets phase_origin so that s is the day of year of the
/// first observation.
struct ModelSpec {
  int harmonics = 2;
  int tvar_order = 5;
  InterventionKind intervention = InterventionKind::None;
  double period_length = 365.25;
  int data_length = 1;
  double phase_origin = 0.0;

  double omega() const { return 2.0 * std::numbers::pi / period_length; }
  double season_time(long t) const { return static_cast<double>(t) + phase_origin; }

  void validate() const {
    if (harmonics < 1) throw InputError("model.K must be >= 1");
    if (tvar_order < 1) throw InputError("model.P must be >= 1");
    if (!(period_length > 0.0)) throw InputError("model.period_length must be > 0");
    if (data_length < tvar_order) throw InputError("data length T must be >= P");
  }
};

/// Index bookkeeping for the state and evolution-noise vectors.
///
/// State: mu, beta, (psi_k, psi*_k) for k = 1..K, X_t .. X_{t-L+1},
/// phi_1..phi_P, then delta (Mean) or delta_1..delta_P (Autocorrelation).
/// L = P, except for the Autocorrelation variant where L = P + 1 so that
/// X_{t-P} is available to the observation equation.
///
/// Noise: w_mu, w_beta, (w_psi_k, w_psi*_k), w_X, w_phi_1..w_phi_P, w_delta(s).
struct StateLayout {
  int K;
  int P;
  InterventionKind kind;

  explicit StateLayout(const ModelSpec& spec)
      : K(spec.harmonics), P(spec.tvar_order), kind(spec.intervention) {}

  int n_lags() const { return kind == InterventionKind::Autocorrelation ? P + 1 : P; }
  int n_delta() const {
    switch (kind) {
      case InterventionKind::None: return 0;
      case InterventionKind::Mean: return 1;
      case InterventionKind::Autocorrelation: return P;
    }
    return 0;
  }

  int mu() const { return 0; }
  int beta() const { return 1; }
  int psi(int k) const { return 2 + 2 * k; }        // k = 0..K-1
  int psi_star(int k) const { return 3 + 2 * k; }   // k = 0..K-1
  int x(int lag) const { return 2 + 2 * K + lag; }  // lag = 0..n_lags()-1, x(0) = X_t
  int phi(int p) const { return 2 + 2 * K + n_lags() + p; }  // p = 0..P-1
  int delta(int p = 0) const { return 2 + 2 * K + n_lags() + P + p; }
  int dim() const { return 2 + 2 * K + n_lags() + P + n_delta(); }

  int w_mu() const { return 0; }
  int w_beta() const { return 1; }
  int w_psi(int k) const { return 2 + 2 * k; }
  int w_psi_star(int k) const { return 3 + 2 * k; }
  int w_x() const { return 2 + 2 * K; }
  int w_phi(int p) const { return 3 + 2 * K + p; }
  int w_delta(int p = 0) const { return 3 + 2 * K + P + p; }
  int noise_dim() const { return 3 + 2 * K + P + n_delta(); }
};

/// Static parameters. W_psi is tied to W_mu by the samplers; it is kept as a
/// separate field so that it can be set independently where needed.
struct HyperParams {
  double V = 1e-4;
  double W_mu = 1e-5;
  double W_beta = 1e-12;
  double W_psi = 1e-5;
  double W_phi = 1e-8;
  double W_X = 1.0;
  double a = 0.5;
  double b = 2.0;
  double alpha = 305.0;
  double gamma = 180.0;
  double rho = 0.4;
  double varphi = 0.9;
  double W_delta = 1e-3;

  std::string describe() const {
    std::ostringstream os;
    os.precision(6);
    os << "V=" << V << " W_mu=" << W_mu << " W_beta=" << W_beta << " W_psi=" << W_psi
       << " W_phi=" << W_phi << " W_X=" << W_X << " a=" << a << " b=" << b << " alpha=" << alpha
       << " gamma=" << gamma << " rho=" << rho << " varphi=" << varphi << " W_delta=" << W_delta;
    return os.str();
  }

  void validate(const ModelSpec& spec) const {
    auto nonneg = [](double v, const char* name) {
      if (!(v >= 0.0) || !std::isfinite(v))
        throw InputError(std::string(name) + " must be a finite non-negative variance");
    };
    nonneg(V, "V");
    nonneg(W_mu, "W_mu");
    nonneg(W_beta, "W_beta");
    nonneg(W_psi, "W_psi");
    nonneg(W_phi, "W_phi");
    nonneg(W_delta, "W_delta");
    if (!(W_X > 0.0) || !std::isfinite(W_X)) throw InputError("W_X must be > 0");
    if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(alpha))
      throw InputError("a, b and alpha must be finite");
    if (!(rho >= 0.0 && rho <= 1.0)) throw InputError("rho must lie in [0, 1]");
    if (!(varphi >= 0.0 && varphi <= 1.0)) throw InputError("varphi must lie in [0, 1]");
    if (!(gamma >= 0.0 && gamma <= spec.period_length))
      throw InputError("gamma must lie in [0, period_length]");
  }
};

/// Trapezoidal coupling weight at a continuous seasonal time.
///
/// Rises linearly over rho*gamma/2 days from alpha, holds at 1, then falls
/// over rho*gamma/2 days to end at alpha + gamma. Periodic in period_length.
inline double trapezoid_weight(double s, double alpha, double gamma, double rho,
                               double period_length) {
  if (gamma <= 0.0) return 0.0;
  double u = std::fmod(s - alpha, period_length);
  if (u < 0.0) u += period_length;
  if (u >= gamma) return 0.0;
  const double ramp = 0.5 * rho * gamma;
  if (ramp > 0.0) {
    if (u < ramp) return u / ramp;
    if (u > gamma - ramp) return (gamma - u) / ramp;
  }
  return 1.0;
}

/// Coupling weight lambda_t at integer model time t (midpoint convention:
/// the trapezoid is evaluated at seasonal time + 0.5). Zero for models
/// without an intervention.
inline double intervention_weight(long t, const ModelSpec& spec, const HyperParams& phi) {
  if (spec.intervention == InterventionKind::None) return 0.0;
  return trapezoid_weight(spec.season_time(t) + 0.5, phi.alpha, phi.gamma, phi.rho,
                          spec.period_length);
}

/// lambda_t for t = 1..T, returned 0-based (element i is t = i + 1).
inline std::vector<double> build_intervention_profile(double alpha, double gamma, double rho,
                                                      double period_length, int T,
                                                      double phase_origin = 0.0) {
  if (!(rho >= 0.0 && rho <= 1.0)) throw DomainError("rho must lie in [0, 1]");
  if (!(gamma > 0.0)) throw DomainError("gamma must be > 0");
  if (gamma > period_length)
    throw DomainError("gamma exceeds the period length; the profile would overlap itself");
  std::vector<double> lambda(static_cast<std::size_t>(T));
  for (int i = 0; i < T; ++i)
    lambda[i] = trapezoid_weight(i + 1 + phase_origin + 0.5, alpha, gamma, rho, period_length);
  return lambda;
}

/// Irregular evolution variance at seasonal time s:
/// W_X + sqrt(a^2 + b^2) + a sin(omega s) + b cos(omega s).
inline double evolution_variance_WXt(double W_X, double a, double b, double s,
                                     double period_length) {
  const double w = 2.0 * std::numbers::pi / period_length * s;
  return W_X + std::hypot(a, b) + a * std::sin(w) + b * std::cos(w);
}

/// Diagonal of the evolution noise covariance at model time t.
inline Vector evolution_noise_variances(long t, const ModelSpec& spec, const HyperParams& phi) {
  const StateLayout L(spec);
  Vector w(L.noise_dim());
  w[L.w_mu()] = phi.W_mu;
  w[L.w_beta()] = phi.W_beta;
  for (int k = 0; k < L.K; ++k) {
    w[L.w_psi(k)] = phi.W_psi;
    w[L.w_psi_star(k)] = phi.W_psi;
  }
  w[L.w_x()] = evolution_variance_WXt(phi.W_X, phi.a, phi.b, spec.season_time(t),
                                      spec.period_length);
  for (int p = 0; p < L.P; ++p) w[L.w_phi(p)] = phi.W_phi;
  for (int p = 0; p < L.n_delta(); ++p) w[L.w_delta(p)] = phi.W_delta;
  return w;
}

/// Observation function f(theta_t, v_t).
inline double observation_fn(const Vector& theta, double v, double lambda_t,
                             const ModelSpec& spec) {
  const StateLayout L(spec);
  double y = theta[L.mu()] + theta[L.x(0)] + v;
  for (int k = 0; k < L.K; ++k) y += theta[L.psi(k)];
  if (L.kind == InterventionKind::Mean) {
    y += lambda_t * theta[L.delta()];
  } else if (L.kind == InterventionKind::Autocorrelation) {
    double s = 0.0;
    for (int p = 0; p < L.P; ++p) s += theta[L.delta(p)] * theta[L.x(p + 1)];
    y += lambda_t * s;
  }
  return y;
}

/// Evolution function g(theta_{t-1}, w_t). The TVAR coefficients are updated
/// first so X_t uses phi_{p,t}.
inline Vector evolution_fn(const Vector& prev, const Vector& w, const ModelSpec& spec,
                           const HyperParams& phi) {
  const StateLayout L(spec);
  Vector next(L.dim());
  const double beta = prev[L.beta()] + w[L.w_beta()];
  next[L.beta()] = beta;
  next[L.mu()] = prev[L.mu()] + beta + w[L.w_mu()];
  const double omega = spec.omega();
  for (int k = 0; k < L.K; ++k) {
    const double c = std::cos((k + 1) * omega), s = std::sin((k + 1) * omega);
    const double p0 = prev[L.psi(k)], p1 = prev[L.psi_star(k)];
    next[L.psi(k)] = p0 * c + p1 * s + w[L.w_psi(k)];
    next[L.psi_star(k)] = p1 * c - p0 * s + w[L.w_psi_star(k)];
  }
  double x = w[L.w_x()];
  for (int p = 0; p < L.P; ++p) {
    const double coef = prev[L.phi(p)] + w[L.w_phi(p)];
    next[L.phi(p)] = coef;
    x += coef * prev[L.x(p)];
  }
  for (int lag = L.n_lags() - 1; lag > 0; --lag) next[L.x(lag)] = prev[L.x(lag - 1)];
  next[L.x(0)] = x;
  for (int p = 0; p < L.n_delta(); ++p)
    next[L.delta(p)] = phi.varphi * prev[L.delta(p)] + w[L.w_delta(p)];
  return next;
}

/// Evolution Jacobians with respect to state (G) and noise (H), at
/// (theta_prev, w = 0).
inline void evolution_jacobians(const Vector& prev, const ModelSpec& spec, const HyperParams& phi,
                                Matrix& G, Matrix& H) {
  const StateLayout L(spec);
  const int n = L.dim();
  G.setZero(n, n);
  H.setZero(n, L.noise_dim());
  G(L.mu(), L.mu()) = 1.0;
  G(L.mu(), L.beta()) = 1.0;
  G(L.beta(), L.beta()) = 1.0;
  H(L.mu(), L.w_mu()) = 1.0;
  H(L.mu(), L.w_beta()) = 1.0;
  H(L.beta(), L.w_beta()) = 1.0;
  const double omega = spec.omega();
  for (int k = 0; k < L.K; ++k) {
    const double c = std::cos((k + 1) * omega), s = std::sin((k + 1) * omega);
    G(L.psi(k), L.psi(k)) = c;
    G(L.psi(k), L.psi_star(k)) = s;
    G(L.psi_star(k), L.psi(k)) = -s;
    G(L.psi_star(k), L.psi_star(k)) = c;
    H(L.psi(k), L.w_psi(k)) = 1.0;
    H(L.psi_star(k), L.w_psi_star(k)) = 1.0;
  }
  H(L.x(0), L.w_x()) = 1.0;
  for (int p = 0; p < L.P; ++p) {
    G(L.x(0), L.x(p)) = prev[L.phi(p)];
    G(L.x(0), L.phi(p)) = prev[L.x(p)];
    G(L.phi(p), L.phi(p)) = 1.0;
    H(L.x(0), L.w_phi(p)) = prev[L.x(p)];
    H(L.phi(p), L.w_phi(p)) = 1.0;
  }
  for (int lag = 1; lag < L.n_lags(); ++lag) G(L.x(lag), L.x(lag - 1)) = 1.0;
  for (int p = 0; p < L.n_delta(); ++p) {
    G(L.delta(p), L.delta(p)) = phi.varphi;
    H(L.delta(p), L.w_delta(p)) = 1.0;
  }
}

/// Observation gradient F = df/dtheta at theta (v = 0). df/dv is always 1.
inline Vector observation_gradient(const Vector& theta, double lambda_t, const ModelSpec& spec) {
  const StateLayout L(spec);
  Vector F = Vector::Zero(L.dim());
  F[L.mu()] = 1.0;
  for (int k = 0; k < L.K; ++k) F[L.psi(k)] = 1.0;
  F[L.x(0)] = 1.0;
  if (L.kind == InterventionKind::Mean) {
    F[L.delta()] = lambda_t;
  } else if (L.kind == InterventionKind::Autocorrelation) {
    for (int p = 0; p < L.P; ++p) {
      F[L.x(p + 1)] += lambda_t * theta[L.delta(p)];
      F[L.delta(p)] = lambda_t * theta[L.x(p + 1)];
    }
  }
  return F;
}

struct Jacobians {
  Matrix G;
  Matrix H;
  Vector F;
  double J = 1.0;
};

/// All four Jacobians at a single expansion point (noise at zero).
inline Jacobians jacobians(const Vector& theta_hat, const ModelSpec& spec, const HyperParams& phi,
                           double lambda_t) {
  Jacobians out;
  evolution_jacobians(theta_hat, spec, phi, out.G, out.H);
  out.F = observation_gradient(theta_hat, lambda_t, spec);
  return out;
}

/// The model variant bound to one set of hyper-parameters, exposing the
/// interface the filter and samplers need (see StateSpaceModel in
/// filter.hpp). The evolution Jacobians have a fixed sparsity pattern, so
/// G C G' + H W H' is formed without dense matrix products.
class TvarModel {
 public:
  TvarModel(const ModelSpec& spec, const HyperParams& phi)
      : spec_(spec), phi_(phi), L_(spec) {
    const double omega = spec.omega();
    cos_.resize(L_.K);
    sin_.resize(L_.K);
    for (int k = 0; k < L_.K; ++k) {
      cos_[k] = std::cos((k + 1) * omega);
      sin_[k] = std::sin((k + 1) * omega);
    }
  }

  const ModelSpec& spec() const { return spec_; }
  const HyperParams& params() const { return phi_; }
  const StateLayout& layout() const { return L_; }
  int dim() const { return L_.dim(); }
  int noise_dim() const { return L_.noise_dim(); }
  double observation_variance() const { return phi_.V; }
  std::string describe() const { return phi_.describe(); }

  double lambda(long t) const { return intervention_weight(t, spec_, phi_); }
  Vector noise_variances(long t) const { return evolution_noise_variances(t, spec_, phi_); }

  Vector evolve(const Vector& prev, const Vector& w, long /*t*/) const {
    return evolution_fn(prev, w, spec_, phi_);
  }
  Vector evolve_mean(const Vector& prev, long /*t*/) const {
    return evolution_fn(prev, Vector::Zero(L_.noise_dim()), spec_, phi_);
  }
  double observe(const Vector& theta, double v, long t) const {
    return observation_fn(theta, v, lambda(t), spec_);
  }
  Vector observation_gradient(const Vector& theta, long t) const {
    return icts::observation_gradient(theta, lambda(t), spec_);
  }
  void evolution_jacobians(const Vector& prev, long /*t*/, Matrix& G, Matrix& H) const {
    icts::evolution_jacobians(prev, spec_, phi_, G, H);
  }

  /// R = G C G' + H W_t H', with G and H evaluated at prev.
  void predict_covariance(const Vector& prev, const Matrix& C, long t, Matrix& R,
                          Matrix& work) const {
    left_multiply(prev, C, work);
    work.transposeInPlace();
    left_multiply(prev, work, R);
    add_noise(prev, noise_variances(t), R);
  }

  /// out = G(prev) * M
  void left_multiply(const Vector& prev, const Matrix& M, Matrix& out) const {
    const Eigen::Index cols = M.cols();
    out.resize(M.rows(), cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
      auto src = M.col(j);
      auto dst = out.col(j);
      dst[L_.mu()] = src[L_.mu()] + src[L_.beta()];
      dst[L_.beta()] = src[L_.beta()];
      for (int k = 0; k < L_.K; ++k) {
        const double p0 = src[L_.psi(k)], p1 = src[L_.psi_star(k)];
        dst[L_.psi(k)] = cos_[k] * p0 + sin_[k] * p1;
        dst[L_.psi_star(k)] = cos_[k] * p1 - sin_[k] * p0;
      }
      double x = 0.0;
      for (int p = 0; p < L_.P; ++p)
        x += prev[L_.phi(p)] * src[L_.x(p)] + prev[L_.x(p)] * src[L_.phi(p)];
      for (int lag = L_.n_lags() - 1; lag > 0; --lag) dst[L_.x(lag)] = src[L_.x(lag - 1)];
      dst[L_.x(0)] = x;
      for (int p = 0; p < L_.P; ++p) dst[L_.phi(p)] = src[L_.phi(p)];
      for (int p = 0; p < L_.n_delta(); ++p) dst[L_.delta(p)] = phi_.varphi * src[L_.delta(p)];
    }
  }

  /// R += H(prev) diag(w) H(prev)'
  void add_noise(const Vector& prev, const Vector& w, Matrix& R) const {
    const int mu = L_.mu(), beta = L_.beta(), x0 = L_.x(0);
    R(mu, mu) += w[L_.w_mu()] + w[L_.w_beta()];
    R(mu, beta) += w[L_.w_beta()];
    R(beta, mu) += w[L_.w_beta()];
    R(beta, beta) += w[L_.w_beta()];
    for (int k = 0; k < L_.K; ++k) {
      R(L_.psi(k), L_.psi(k)) += w[L_.w_psi(k)];
      R(L_.psi_star(k), L_.psi_star(k)) += w[L_.w_psi_star(k)];
    }
    R(x0, x0) += w[L_.w_x()];
    for (int p = 0; p < L_.P; ++p) {
      const double wp = w[L_.w_phi(p)], xp = prev[L_.x(p)];
      const int ip = L_.phi(p);
      R(ip, ip) += wp;
      R(x0, x0) += wp * xp * xp;
      R(x0, ip) += wp * xp;
      R(ip, x0) += wp * xp;
    }
    for (int p = 0; p < L_.n_delta(); ++p) R(L_.delta(p), L_.delta(p)) += w[L_.w_delta(p)];
  }

 private:
  ModelSpec spec_;
  HyperParams phi_;
  StateLayout L_;
  std::vector<double> cos_, sin_;
};

/// A time-invariant linear-Gaussian model given by dense matrices:
/// theta_t = G theta_{t-1} + H w_t, y_t = F' theta_t + v_t. Used for
/// reductions such as the local-level model.
class LinearGaussianModel {
 public:
  LinearGaussianModel(Matrix G, Matrix H, Vector W, Vector F, double V)
      : G_(std::move(G)), H_(std::move(H)), W_(std::move(W)), F_(std::move(F)), V_(V) {
    if (G_.rows() != G_.cols() || H_.rows() != G_.rows() || H_.cols() != W_.size() ||
        F_.size() != G_.rows())
      throw InputError("inconsistent linear-Gaussian model dimensions");
  }

  /// y_t = mu_t + v_t, mu_t = mu_{t-1} + w_t.
  static LinearGaussianModel local_level(double V, double W) {
    return LinearGaussianModel(Matrix::Identity(1, 1), Matrix::Identity(1, 1),
                               Vector::Constant(1, W), Vector::Ones(1), V);
  }

  int dim() const { return static_cast<int>(G_.rows()); }
  int noise_dim() const { return static_cast<int>(W_.size()); }
  double observation_variance() const { return V_; }
  std::string describe() const { return "linear-gaussian model"; }
  Vector noise_variances(long /*t*/) const { return W_; }

  Vector evolve(const Vector& prev, const Vector& w, long /*t*/) const { return G_ * prev + H_ * w; }
  Vector evolve_mean(const Vector& prev, long /*t*/) const { return G_ * prev; }
  double observe(const Vector& theta, double v, long /*t*/) const { return F_.dot(theta) + v; }
  Vector observation_gradient(const Vector& /*theta*/, long /*t*/) const { return F_; }
  void evolution_jacobians(const Vector& /*prev*/, long /*t*/, Matrix& G, Matrix& H) const {
    G = G_;
    H = H_;
  }
  void predict_covariance(const Vector& /*prev*/, const Matrix& C, long /*t*/, Matrix& R,
                          Matrix& work) const {
    work.noalias() = G_ * C;
    R.noalias() = work * G_.transpose();
    R.noalias() += H_ * W_.asDiagonal() * H_.transpose();
  }

 private:
  Matrix G_, H_;
  Vector W_, F_;
  double V_;
};

/// Independent normal prior on theta_0: mean and diagonal variances.
struct StatePrior {
  Vector mean;
  Vector variance;

  void validate(const ModelSpec& spec) const {
    const StateLayout L(spec);
    if (mean.size() != L.dim() || variance.size() != L.dim())
      throw InputError("state prior dimension does not match the model layout");
    for (int i = 0; i < variance.size(); ++i)
      if (!(variance[i] >= 0.0) || !std::isfinite(mean[i]))
        throw InputError("state prior variances must be >= 0 and means finite");
  }

  Matrix covariance() const { return variance.asDiagonal(); }

  /// Informative defaults for a daily pressure-difference index (K = 2,
  /// P = 5). Extra harmonics get mean 0 and variance 1, extra TVAR
  /// coefficients mean 0 and variance 0.2^2.
  static StatePrior informative(const ModelSpec& spec) {
    const StateLayout L(spec);
    StatePrior pr{Vector::Zero(L.dim()), Vector::Zero(L.dim())};
    pr.mean[L.mu()] = 6.0;
    pr.variance[L.mu()] = 1.0;
    pr.variance[L.beta()] = 0.002 * 0.002;
    const double psi_mean[2][2] = {{3.6, 1.0}, {1.3, 0.7}};
    const double psi_sd[2][2] = {{1.0, 1.5}, {0.9, 1.3}};
    for (int k = 0; k < L.K; ++k) {
      const bool known = k < 2;
      pr.mean[L.psi(k)] = known ? psi_mean[k][0] : 0.0;
      pr.mean[L.psi_star(k)] = known ? psi_mean[k][1] : 0.0;
      pr.variance[L.psi(k)] = known ? psi_sd[k][0] * psi_sd[k][0] : 1.0;
      pr.variance[L.psi_star(k)] = known ? psi_sd[k][1] * psi_sd[k][1] : 1.0;
    }
    for (int lag = 0; lag < L.n_lags(); ++lag) pr.variance[L.x(lag)] = 100.0;
    const double phi_mean[5] = {1.8, -1.3, 0.7, -0.3, 0.1};
    for (int p = 0; p < L.P; ++p) {
      pr.mean[L.phi(p)] = p < 5 ? phi_mean[p] : 0.0;
      pr.variance[L.phi(p)] = 0.04;
    }
    if (L.kind == InterventionKind::Mean) pr.variance[L.delta()] = 25.0;
    for (int p = 0; L.kind == InterventionKind::Autocorrelation && p < L.P; ++p)
      pr.variance[L.delta(p)] = 0.04;
    return pr;
  }

  /// Mildly informative priors used for simulation studies.
  static StatePrior vague(const ModelSpec& spec) {
    const StateLayout L(spec);
    StatePrior pr{Vector::Zero(L.dim()), Vector::Zero(L.dim())};
    pr.variance[L.mu()] = 25.0;
    pr.variance[L.beta()] = 0.002 * 0.002;
    for (int k = 0; k < L.K; ++k) {
      pr.variance[L.psi(k)] = 25.0;
      pr.variance[L.psi_star(k)] = 25.0;
    }
    for (int lag = 0; lag < L.n_lags(); ++lag) pr.variance[L.x(lag)] = 100.0;
    for (int p = 0; p < L.P; ++p) pr.variance[L.phi(p)] = 1.0;
    if (L.kind == InterventionKind::Mean) pr.variance[L.delta()] = 25.0;
    for (int p = 0; L.kind == InterventionKind::Autocorrelation && p < L.P; ++p)
      pr.variance[L.delta(p)] = 0.04;
    return pr;
  }
};

}  // namespace icts

#endif  // ICTS_MODEL_HPP
