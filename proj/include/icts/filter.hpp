#ifndef ICTS_FILTER_HPP
#define ICTS_FILTER_HPP

#include <cmath>
#include <concepts>
#include <numbers>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "icts/error.hpp"
#include "icts/linalg.hpp"
#include "icts/model.hpp"
#include "icts/random.hpp"

namespace icts {

/// Observed series; std::nullopt marks a missing day.
using Series = std::vector<std::optional<double>>;

struct FilterStep {
  Vector a;  // predicted mean
  Matrix R;  // predicted covariance
  double f = 0.0;  // one-step forecast mean
  double Q = 0.0;  // one-step forecast variance
  double e = 0.0;  // innovation (0 when missing)
  Vector A;  // gain (zero when missing)
  Vector m;  // filtered mean
  Matrix C;  // filtered covariance
  bool observed = false;
};

enum class FilterStorage { Full, LikelihoodOnly };

/// Output of the forward pass. steps[i] holds time start_time + i + 1; the
/// prior (m0, C0) is the state at start_time. m_last / C_last are always
/// populated, also when only the likelihood was requested.
struct FilterResult {
  long start_time = 0;
  Vector m0;
  Matrix C0;
  std::vector<FilterStep> steps;
  Vector m_last;
  Matrix C_last;
  long length = 0;
  double log_marginal_likelihood = 0.0;

  long end_time() const { return start_time + length; }
  const FilterStep& at(long t) const { return steps.at(static_cast<std::size_t>(t - start_time - 1)); }
};

/// What the filter, smoother and forecaster need from a model bound to its
/// hyper-parameters. `t` is the model time of the state being produced.
template <typename M>
concept StateSpaceModel = requires(const M& m, const Vector& v, const Matrix& c, Matrix& out,
                                   Matrix& out2, long t) {
  { m.dim() } -> std::convertible_to<int>;
  { m.noise_dim() } -> std::convertible_to<int>;
  { m.observation_variance() } -> std::convertible_to<double>;
  { m.describe() } -> std::convertible_to<std::string>;
  { m.noise_variances(t) } -> std::convertible_to<Vector>;
  { m.evolve(v, v, t) } -> std::convertible_to<Vector>;
  { m.evolve_mean(v, t) } -> std::convertible_to<Vector>;
  { m.observe(v, 0.0, t) } -> std::convertible_to<double>;
  { m.observation_gradient(v, t) } -> std::convertible_to<Vector>;
  m.evolution_jacobians(v, t, out, out2);
  m.predict_covariance(v, c, t, out, out2);
};

namespace detail {

inline NumericalFailure filter_failure(const std::string& what, long t, const std::string& model) {
  return NumericalFailure(what + " at t=" + std::to_string(t) + " (" + model + ")", t);
}

}  // namespace detail

/// Linearised forward filter. Re-linearises at (m_{t-1}, 0) every step;
/// missing observations give a prediction-only step. The prior describes the
/// state at `start_time`; y[i] is the observation at start_time + i + 1.
template <StateSpaceModel Model>
FilterResult forward_filter(const Series& y, const Model& model, const Vector& m0, const Matrix& C0,
                            long start_time = 0, FilterStorage storage = FilterStorage::Full) {
  const int n = model.dim();
  if (m0.size() != n || C0.rows() != n || C0.cols() != n)
    throw InputError("prior dimension does not match the model layout");
  for (std::size_t i = 0; i < y.size(); ++i)
    if (y[i] && !std::isfinite(*y[i]))
      throw InputError("non-finite observation at index " + std::to_string(i + 1));

  FilterResult out;
  out.start_time = start_time;
  out.m0 = m0;
  out.C0 = C0;
  out.length = static_cast<long>(y.size());
  if (storage == FilterStorage::Full) out.steps.reserve(y.size());

  const double V = model.observation_variance();
  Vector m = m0, a(n), r(n), A(n), F(n);
  Matrix C = C0, work(n, n), R(n, n);
  double loglik = 0.0;
  constexpr double log2pi = 1.8378770664093453;

  for (std::size_t i = 0; i < y.size(); ++i) {
    const long t = start_time + static_cast<long>(i) + 1;
    a = model.evolve_mean(m, t);
    model.predict_covariance(m, C, t, R, work);
    linalg::symmetrize(R);

    F = model.observation_gradient(a, t);
    const double f = model.observe(a, 0.0, t);
    r.noalias() = R * F;
    const double q0 = F.dot(r);
    const double Q = q0 + V;
    if (!(Q > 0.0) || !std::isfinite(Q))
      throw detail::filter_failure("non-positive forecast variance", t, model.describe());

    double e = 0.0;
    if (y[i]) {
      e = *y[i] - f;
      A = r / Q;
      m = a + A * e;
      // Joseph form (I - A F') R (I - A F')' + A V A', expanded for scalar y.
      C = R;
      C.noalias() -= A * r.transpose();
      C.noalias() -= r * A.transpose();
      C.noalias() += Q * (A * A.transpose());
      loglik -= 0.5 * (log2pi + std::log(Q) + e * e / Q);
    } else {
      A.setZero();
      m = a;
      C = R;
    }
    linalg::symmetrize(C);
    if (!m.allFinite() || !C.allFinite())
      throw detail::filter_failure("non-finite filtered state", t, model.describe());

    if (storage == FilterStorage::Full) {
      FilterStep s;
      s.a = a;
      s.R = R;
      s.f = f;
      s.Q = Q;
      s.e = e;
      s.A = A;
      s.m = m;
      s.C = C;
      s.observed = y[i].has_value();
      out.steps.push_back(std::move(s));
    }
  }
  out.m_last = m;
  out.C_last = C;
  out.log_marginal_likelihood = loglik;
  return out;
}

inline FilterResult forward_filter(const Series& y, const HyperParams& phi, const ModelSpec& spec,
                                   const StatePrior& prior,
                                   FilterStorage storage = FilterStorage::Full) {
  prior.validate(spec);
  return forward_filter(y, TvarModel(spec, phi), prior.mean, prior.covariance(), 0, storage);
}

inline double log_marginal_likelihood(const Series& y, const HyperParams& phi, const ModelSpec& spec,
                                      const StatePrior& prior) {
  return forward_filter(y, phi, spec, prior, FilterStorage::LikelihoodOnly).log_marginal_likelihood;
}

/// Backward-sampling recursion precomputed for one filter pass:
/// theta_t | theta_{t+1} ~ N(m_t + B_t (theta_{t+1} - a_{t+1}), H_t),
/// B_t = C_t G_{t+1}' R_{t+1}^+. Drawing many trajectories under one set of
/// hyper-parameters reuses the gains.
class BackwardSampler {
 public:
  template <StateSpaceModel Model>
  BackwardSampler(const FilterResult& fr, const Model& model) : length_(fr.length) {
    const long T = fr.length;
    if (T < 1 || static_cast<long>(fr.steps.size()) != T)
      throw InputError("backward sampling needs a complete filter result");
    gain_.resize(T);
    root_.resize(T);
    cov_.resize(T);
    m_.resize(T);
    a_.resize(T);
    for (long i = 0; i < T; ++i) {
      m_[i] = fr.steps[i].m;
      a_[i] = fr.steps[i].a;
    }
    Matrix G, H, Rpinv, CGt, M, BH;
    for (long i = T - 1; i >= 0; --i) {
      const FilterStep& s = fr.steps[i];
      const long t = fr.start_time + i + 1;
      if (i == T - 1) {
        cov_[i] = s.C;
      } else {
        const FilterStep& nx = fr.steps[i + 1];
        model.evolution_jacobians(s.m, t + 1, G, H);
        if (!linalg::symmetric_pseudo_inverse(nx.R, Rpinv))
          throw detail::filter_failure("pseudo-inverse of R failed", t + 1, model.describe());
        CGt.noalias() = s.C * G.transpose();
        gain_[i].noalias() = CGt * Rpinv;
        // C - B R B' in the form (I - B G) C (I - B G)' + B H W H' B', which
        // stays PSD when the evolution is nearly deterministic.
        M = -gain_[i] * G;
        M.diagonal().array() += 1.0;
        BH.noalias() = gain_[i] * H;
        cov_[i].noalias() = M * s.C * M.transpose();
        cov_[i].noalias() += BH * model.noise_variances(t + 1).asDiagonal() * BH.transpose();
        linalg::symmetrize(cov_[i]);
      }
      if (!linalg::psd_square_root(cov_[i], root_[i]) || !root_[i].allFinite())
        throw detail::filter_failure("factorisation of backward covariance failed", t,
                                     model.describe());
    }
  }

  BackwardSampler(const FilterResult& fr, const HyperParams& phi, const ModelSpec& spec)
      : BackwardSampler(fr, TvarModel(spec, phi)) {}

  long length() const { return length_; }

  /// One joint draw; row i is the state at time start_time + i + 1.
  Matrix sample(Rng& rng) const {
    const long T = length_;
    const Eigen::Index n = m_[0].size();
    Matrix traj(T, n);
    Vector cur = m_[T - 1] + root_[T - 1] * standard_normal_vector(n, rng);
    traj.row(T - 1) = cur.transpose();
    for (long i = T - 2; i >= 0; --i) {
      Vector h = m_[i] + gain_[i] * (cur - a_[i + 1]);
      cur = h + root_[i] * standard_normal_vector(n, rng);
      traj.row(i) = cur.transpose();
    }
    return traj;
  }

  /// Marginal means and covariances of the distribution `sample` draws from.
  void moments(std::vector<Vector>& mean, std::vector<Matrix>& cov) const {
    const long T = length_;
    mean.assign(T, Vector());
    cov.assign(T, Matrix());
    mean[T - 1] = m_[T - 1];
    cov[T - 1] = cov_[T - 1];
    for (long i = T - 2; i >= 0; --i) {
      mean[i] = m_[i] + gain_[i] * (mean[i + 1] - a_[i + 1]);
      cov[i] = cov_[i];
      cov[i].noalias() += gain_[i] * cov[i + 1] * gain_[i].transpose();
    }
  }

 private:
  long length_;
  std::vector<Vector> m_, a_;
  std::vector<Matrix> gain_, root_, cov_;
};

template <StateSpaceModel Model>
Matrix backward_sample(const FilterResult& fr, const Model& model, Rng& rng) {
  return BackwardSampler(fr, model).sample(rng);
}

inline Matrix backward_sample(const FilterResult& fr, const HyperParams& phi, const ModelSpec& spec,
                              Rng& rng) {
  return BackwardSampler(fr, phi, spec).sample(rng);
}

struct ForecastPaths {
  Matrix observations;  // n_samples x horizon
  Vector observation_mean;  // per horizon
  Matrix state_mean;  // horizon x dim
  std::vector<Matrix> states;  // per sample, horizon x dim (only if requested)
};

/// Samples k-step-ahead paths from N(m_t, C_t) at time t, propagating
/// through g with fresh evolution noise and f with fresh observation noise.
template <StateSpaceModel Model>
ForecastPaths forecast(const Vector& m_t, const Matrix& C_t, long t, const Model& model, int horizon,
                       int n_samples, Rng& rng, bool keep_states = false) {
  if (horizon < 1) throw InputError("forecast horizon must be >= 1");
  if (n_samples < 1) throw InputError("forecast needs at least one sample");
  const int n = model.dim();
  Matrix root;
  if (!linalg::psd_square_root(C_t, root)) throw NumericalFailure("factorisation of C_t failed", t);

  std::vector<Vector> wsd(horizon);
  for (int h = 0; h < horizon; ++h) wsd[h] = model.noise_variances(t + h + 1).cwiseSqrt();
  const double vsd = std::sqrt(model.observation_variance());

  ForecastPaths out;
  out.observations.resize(n_samples, horizon);
  out.state_mean = Matrix::Zero(horizon, n);
  if (keep_states) out.states.resize(n_samples);
  for (int j = 0; j < n_samples; ++j) {
    Vector theta = m_t + root * standard_normal_vector(n, rng);
    if (keep_states) out.states[j].resize(horizon, n);
    for (int h = 0; h < horizon; ++h) {
      Vector w = wsd[h].cwiseProduct(standard_normal_vector(model.noise_dim(), rng));
      theta = model.evolve(theta, w, t + h + 1);
      out.observations(j, h) = model.observe(theta, vsd * standard_normal(rng), t + h + 1);
      out.state_mean.row(h) += theta.transpose();
      if (keep_states) out.states[j].row(h) = theta.transpose();
    }
  }
  if (!out.observations.allFinite()) throw NumericalFailure("non-finite forecast path", t);
  out.state_mean /= static_cast<double>(n_samples);
  out.observation_mean = out.observations.colwise().mean().transpose();
  return out;
}

inline ForecastPaths forecast(const Vector& m_t, const Matrix& C_t, long t, const HyperParams& phi,
                              const ModelSpec& spec, int horizon, int n_samples, Rng& rng,
                              bool keep_states = false) {
  return forecast(m_t, C_t, t, TvarModel(spec, phi), horizon, n_samples, rng, keep_states);
}

/// Debug dump: t, f_t, Q_t, m_t components, diag(C_t).
inline void write_filter_csv(std::ostream& os, const FilterResult& fr) {
  if (fr.steps.empty()) return;
  const Eigen::Index n = fr.m0.size();
  os << "t,f,Q";
  for (Eigen::Index i = 0; i < n; ++i) os << ",m" << i;
  for (Eigen::Index i = 0; i < n; ++i) os << ",C" << i;
  os << '\n';
  os.precision(17);
  for (std::size_t i = 0; i < fr.steps.size(); ++i) {
    const FilterStep& s = fr.steps[i];
    os << fr.start_time + static_cast<long>(i) + 1 << ',' << s.f << ',' << s.Q;
    for (Eigen::Index k = 0; k < n; ++k) os << ',' << s.m[k];
    for (Eigen::Index k = 0; k < n; ++k) os << ',' << s.C(k, k);
    os << '\n';
  }
}

}  // namespace icts

#endif  // ICTS_FILTER_HPP
