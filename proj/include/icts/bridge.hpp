#ifndef ICTS_BRIDGE_HPP
#define ICTS_BRIDGE_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "icts/diagnostics.hpp"
#include "icts/error.hpp"
#include "icts/linalg.hpp"
#include "icts/random.hpp"

namespace icts {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

struct BridgeOptions {
  double tolerance = 1e-10;
  int max_iterations = 1000;
  int min_draws = 500;
};

struct BridgeResult {
  double log_ml = 0.0;
  double relative_mse = 0.0;  // approximate relative mean-squared error of exp(log_ml)
  int iterations = 0;
  int n_fit = 0;              // draws used for the proposal moments
  int n_estimate = 0;         // posterior draws used in the estimator
  int n_proposal = 0;

  double mc_sd() const { return std::sqrt(relative_mse); }  // approximate sd of log_ml
};

namespace detail {

inline double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline double sample_var(const std::vector<double>& v, double mean) {
  double s = 0.0;
  for (double x : v) s += (x - mean) * (x - mean);
  return s / static_cast<double>(v.size() - 1);
}

}  // namespace detail

/// Iterative optimal bridge sampling estimate of the log normalising
/// constant of exp(log_post) (Meng and Wong 1996; Gronau et al. 2017).
///
/// The first half of `draws` (rows are z vectors) fixes a Gaussian proposal
/// by moment matching; the second half and an equal number of proposal
/// draws enter the estimator. `log_post_values`, when non-empty, holds
/// log_post for every row of `draws` and saves re-evaluation.
template <typename LogDensity>
BridgeResult bridge_sampling_log_ml(const Matrix& draws, const LogDensity& log_post, Rng& rng,
                                    const std::vector<double>& log_post_values = {},
                                    const BridgeOptions& opt = {}) {
  const Eigen::Index n = draws.rows(), d = draws.cols();
  if (n < opt.min_draws)
    throw InputError("bridge sampling needs at least " + std::to_string(opt.min_draws) +
                     " posterior draws, got " + std::to_string(n));
  if (!log_post_values.empty() && static_cast<Eigen::Index>(log_post_values.size()) != n)
    throw InputError("log posterior values do not match the draws");
  const Eigen::Index n_fit = n / 2, n1 = n - n_fit, n2 = n1;

  Vector mean;
  Matrix cov = linalg::sample_covariance(draws.topRows(n_fit), &mean);
  linalg::symmetrize(cov);
  Eigen::LLT<Matrix> llt(cov);
  if (llt.info() != Eigen::Success)
    throw NumericalFailure("bridge proposal covariance is not positive definite", -1);
  const Matrix L = llt.matrixL();
  const double log_det = 2.0 * L.diagonal().array().log().sum();
  auto log_g = [&](const Vector& z) {
    const Vector u = L.triangularView<Eigen::Lower>().solve(z - mean);
    return -0.5 * u.squaredNorm() - 0.5 * log_det - 0.5 * d * std::log(2.0 * std::numbers::pi);
  };

  std::vector<double> l1(n1), l2(n2);
  for (Eigen::Index i = 0; i < n1; ++i) {
    const Vector z = draws.row(n_fit + i).transpose();
    const double lp = log_post_values.empty() ? log_post(z) : log_post_values[n_fit + i];
    l1[i] = lp - log_g(z);
  }
  for (Eigen::Index j = 0; j < n2; ++j) {
    const Vector z = mean + L * standard_normal_vector(d, rng);
    const double lp = log_post(z);
    l2[j] = std::isfinite(lp) ? lp - log_g(z) : -std::numeric_limits<double>::infinity();
  }
  for (double v : l1)
    if (!std::isfinite(v)) throw NumericalFailure("non-finite log posterior at a posterior draw", -1);
  if (std::none_of(l2.begin(), l2.end(), [](double v) { return std::isfinite(v); }))
    throw NumericalFailure("no proposal draw has positive posterior density; the posterior draws are a poor basis for the proposal", -1);

  const double lstar = detail::median_of(l1);
  const double s1 = static_cast<double>(n1) / static_cast<double>(n1 + n2);
  const double s2 = static_cast<double>(n2) / static_cast<double>(n1 + n2);
  std::vector<double> e1(n1), e2(n2);
  for (Eigen::Index i = 0; i < n1; ++i) e1[i] = l1[i] - lstar;
  for (Eigen::Index j = 0; j < n2; ++j) e2[j] = l2[j] - lstar;

  // The fixed point is iterated on log r so that poorly matched proposals
  // cannot overflow or underflow the sums.
  const double ls1 = std::log(s1), ls2 = std::log(s2);
  const double ninf = -std::numeric_limits<double>::infinity();
  auto log_mix = [&](double x, double lr) {
    const double a = ls1 + x, b = ls2 + lr;
    const double m = std::max(a, b);
    return m + std::log1p(std::exp(std::min(a, b) - m));
  };
  auto log_mean_exp = [&](const std::vector<double>& v) {
    double m = ninf;
    for (double x : v) m = std::max(m, x);
    if (m == ninf) return ninf;
    double s = 0.0;
    for (double x : v) s += std::exp(x - m);
    return m + std::log(s / static_cast<double>(v.size()));
  };
  std::vector<double> a1(n2), a2(n1);
  auto fill_terms = [&](double lr) {
    for (Eigen::Index j = 0; j < n2; ++j) a1[j] = e2[j] == ninf ? ninf : e2[j] - log_mix(e2[j], lr);
    for (Eigen::Index i = 0; i < n1; ++i) a2[i] = -log_mix(e1[i], lr);
  };

  double lr = 0.0;
  int it = 0;
  bool converged = false;
  double change = 0.0;
  for (it = 1; it <= opt.max_iterations; ++it) {
    fill_terms(lr);
    const double lr_new = log_mean_exp(a1) - log_mean_exp(a2);
    if (!std::isfinite(lr_new))
      throw NumericalFailure("bridge iteration produced a non-finite estimate", -1);
    change = std::abs(std::expm1(lr - lr_new));
    lr = lr_new;
    if (change < opt.tolerance) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    std::ostringstream os;
    os << "bridge sampling did not converge after " << opt.max_iterations
       << " iterations (last relative change " << change << ", log ML " << lr + lstar << ")";
    // with disjoint log ratio ranges the map is lr -> c - lr and only oscillates
    const double max2 = *std::max_element(l2.begin(), l2.end());
    const double min1 = *std::min_element(l1.begin(), l1.end());
    if (max2 < min1)
      os << "; proposal and posterior draws do not overlap (max proposal log ratio " << max2
         << " < min posterior log ratio " << min1 << ")";
    throw ConvergenceError(os.str());
  }

  BridgeResult out;
  out.log_ml = lr + lstar;
  out.iterations = it;
  out.n_fit = static_cast<int>(n_fit);
  out.n_estimate = static_cast<int>(n1);
  out.n_proposal = static_cast<int>(n2);

  // Relative mean-squared error (Fruehwirth-Schnatter 2004), with the
  // posterior-draw term corrected for autocorrelation. Both ratios are
  // scale free, so the terms are rescaled by their maxima.
  fill_terms(lr);
  const double m_a1 = *std::max_element(a1.begin(), a1.end());
  const double m_a2 = *std::max_element(a2.begin(), a2.end());
  std::vector<double> f1(n2), f2(n1);
  for (Eigen::Index j = 0; j < n2; ++j) f1[j] = std::exp(a1[j] - m_a1);
  for (Eigen::Index i = 0; i < n1; ++i) f2[i] = std::exp(a2[i] - m_a2);
  const double m1 = detail::mean_of(f1), m2 = detail::mean_of(f2);
  double ess2 = static_cast<double>(n1);
  try {
    ess2 = effective_sample_size(f2);
  } catch (const DiagnosticUndefined&) {
  }
  out.relative_mse = detail::sample_var(f1, m1) / (m1 * m1) / static_cast<double>(n2) +
                     detail::sample_var(f2, m2) / (m2 * m2) / ess2;
  return out;
}

struct BayesFactor {
  double log_ml_1 = 0.0, log_ml_2 = 0.0;
  double log_bf = 0.0;  // log B = log ML_1 - log ML_2
  double mc_sd = 0.0;   // approximate sd of log B

  double bf() const { return std::exp(log_bf); }
};

inline BayesFactor bayes_factor(const BridgeResult& m1, const BridgeResult& m2) {
  return {m1.log_ml, m2.log_ml, m1.log_ml - m2.log_ml, std::sqrt(m1.relative_mse + m2.relative_mse)};
}

}  // namespace icts

#endif  // ICTS_BRIDGE_HPP
