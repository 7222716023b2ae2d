#ifndef ICTS_LINALG_HPP
#define ICTS_LINALG_HPP

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "icts/random.hpp"

namespace icts::linalg {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline void symmetrize(Matrix& m) {
  const Eigen::Index n = m.rows();
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = j + 1; i < n; ++i) {
      const double v = 0.5 * (m(i, j) + m(j, i));
      m(i, j) = v;
      m(j, i) = v;
    }
}

/// Moore-Penrose inverse of a symmetric PSD matrix via eigendecomposition.
/// Eigenvalues at or below floor_factor * trace / dim are treated as zero.
/// Returns false if the decomposition itself fails.
inline bool symmetric_pseudo_inverse(const Matrix& m, Matrix& out,
                                     double floor_factor = 1e-12) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m);
  if (es.info() != Eigen::Success) return false;
  const double floor = floor_factor * std::max(m.trace(), 0.0) / static_cast<double>(m.rows());
  const Vector& ev = es.eigenvalues();
  Vector inv(ev.size());
  for (Eigen::Index i = 0; i < ev.size(); ++i) inv[i] = ev[i] > floor && ev[i] > 0.0 ? 1.0 / ev[i] : 0.0;
  out.noalias() = es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
  return true;
}

/// A square-root factor S with S S' = cov for a symmetric PSD matrix.
/// Negative eigenvalues from rounding are clamped to zero.
inline bool psd_square_root(const Matrix& cov, Matrix& out) {
  Eigen::LLT<Matrix> llt(cov);
  if (llt.info() == Eigen::Success) {
    out = llt.matrixL();
    if (out.allFinite()) return true;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(cov);
  if (es.info() != Eigen::Success) return false;
  Vector s = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  out = es.eigenvectors() * s.asDiagonal();
  return true;
}

/// Draw from N(mean, cov) for symmetric PSD cov.
inline bool sample_mvn(const Vector& mean, const Matrix& cov, Rng& rng, Vector& out) {
  Matrix root;
  if (!psd_square_root(cov, root)) return false;
  out = mean + root * standard_normal_vector(mean.size(), rng);
  return true;
}

/// Sample mean and (n-1)-denominator covariance of the rows of `draws`.
inline Matrix sample_covariance(const Matrix& draws, Vector* mean_out = nullptr) {
  const Eigen::Index n = draws.rows();
  Vector mean = draws.colwise().mean().transpose();
  Matrix centred = draws.rowwise() - mean.transpose();
  Matrix cov = n > 1 ? Matrix((centred.transpose() * centred) / static_cast<double>(n - 1))
                     : Matrix(Matrix::Zero(draws.cols(), draws.cols()));
  if (mean_out) *mean_out = mean;
  return cov;
}

}  // namespace icts::linalg

#endif  // ICTS_LINALG_HPP
