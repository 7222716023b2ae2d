#ifndef ICTS_DIAGNOSTICS_HPP
#define ICTS_DIAGNOSTICS_HPP

#include <algorithm>
#include <cmath>
#include <vector>

#include "icts/error.hpp"

namespace icts {

namespace detail {

inline double mean_of(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

inline double variance_of(const std::vector<double>& x, double mean) {
  double s = 0.0;
  for (double v : x) s += (v - mean) * (v - mean);
  return s / static_cast<double>(x.size() - 1);
}

}  // namespace detail

/// Potential scale reduction factor for one parameter (Gelman and Rubin
/// 1992, whole chains, no splitting).
inline double gelman_rubin(const std::vector<std::vector<double>>& chains) {
  const std::size_t m = chains.size();
  if (m < 2) throw InputError("PSRF needs at least two chains");
  const std::size_t n = chains[0].size();
  if (n < 2) throw InputError("PSRF needs chains of length >= 2");
  for (const auto& c : chains)
    if (c.size() != n) throw InputError("PSRF needs chains of equal length");
  std::vector<double> means(m);
  double W = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    means[j] = detail::mean_of(chains[j]);
    W += detail::variance_of(chains[j], means[j]);
  }
  W /= static_cast<double>(m);
  if (!(W > 0.0)) throw DiagnosticUndefined("PSRF undefined: zero within-chain variance");
  const double B = static_cast<double>(n) * detail::variance_of(means, detail::mean_of(means));
  const double nn = static_cast<double>(n);
  return std::sqrt(((nn - 1.0) / nn * W + B / nn) / W);
}

/// Effective sample size n / tau with tau = -1 + 2 sum_m (rho_2m + rho_2m+1)
/// truncated at the first non-positive pair (initial positive sequence).
/// tau is floored at 1 / log10(n), which keeps antithetic chains finite.
inline double effective_sample_size(const std::vector<double>& x) {
  const std::size_t n = x.size();
  if (n < 10) throw InputError("ESS needs at least 10 samples");
  const double mean = detail::mean_of(x);
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = x[i] - mean;
  double c0 = 0.0;
  for (double v : d) c0 += v * v;
  c0 /= static_cast<double>(n);
  if (!(c0 > 0.0)) throw DiagnosticUndefined("ESS undefined: zero variance");
  auto rho = [&](std::size_t k) {
    double s = 0.0;
    for (std::size_t i = 0; i + k < n; ++i) s += d[i] * d[i + k];
    return s / static_cast<double>(n) / c0;
  };
  double tau = -1.0;
  for (std::size_t k = 0; k + 1 < n; k += 2) {
    const double pair = (k == 0 ? 1.0 : rho(k)) + rho(k + 1);
    if (!(pair > 0.0)) break;
    tau += 2.0 * pair;
  }
  tau = std::max(tau, 1.0 / std::log10(static_cast<double>(n)));
  return static_cast<double>(n) / tau;
}

/// Sum of per-chain effective sample sizes.
inline double effective_sample_size(const std::vector<std::vector<double>>& chains) {
  double s = 0.0;
  for (const auto& c : chains) s += effective_sample_size(c);
  return s;
}

}  // namespace icts

#endif  // ICTS_DIAGNOSTICS_HPP
