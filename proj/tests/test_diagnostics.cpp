#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "icts/diagnostics.hpp"
#include "icts/random.hpp"

using namespace icts;

namespace {

std::vector<double> normal_draws(std::size_t n, Rng& rng) {
  std::vector<double> x(n);
  for (double& v : x) v = standard_normal(rng);
  return x;
}

std::vector<double> ar1(std::size_t n, double a, Rng& rng) {
  std::vector<double> x(n);
  double cur = standard_normal(rng) / std::sqrt(1.0 - a * a);
  for (double& v : x) {
    cur = a * cur + standard_normal(rng);
    v = cur;
  }
  return x;
}

// Reference PSRF written from the textbook formula with Eigen containers.
double reference_psrf(const std::vector<std::vector<double>>& chains) {
  const int m = static_cast<int>(chains.size()), n = static_cast<int>(chains[0].size());
  Eigen::MatrixXd X(n, m);
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < n; ++i) X(i, j) = chains[j][i];
  Eigen::VectorXd means = X.colwise().mean();
  Eigen::MatrixXd centred = X.rowwise() - means.transpose();
  const double W = centred.array().square().colwise().sum().sum() / (m * (n - 1.0));
  const double B = n * (means.array() - means.mean()).square().sum() / (m - 1.0);
  const double var_plus = (n - 1.0) / n * W + B / n;
  return std::sqrt(var_plus / W);
}

// Reference ESS: full autocorrelation vector first, then Geyer's sum.
double reference_ess(const std::vector<double>& x) {
  const int n = static_cast<int>(x.size());
  Eigen::Map<const Eigen::VectorXd> v(x.data(), n);
  Eigen::VectorXd d = v.array() - v.mean();
  std::vector<double> acf(n);
  for (int k = 0; k < n; ++k) acf[k] = d.head(n - k).dot(d.tail(n - k)) / d.squaredNorm();
  double tau = -1.0;
  for (int m = 0; 2 * m + 1 < n; ++m) {
    const double g = acf[2 * m] + acf[2 * m + 1];
    if (g <= 0) break;
    tau += 2 * g;
  }
  tau = std::max(tau, 1.0 / std::log10(static_cast<double>(n)));
  return n / tau;
}

}  // namespace

TEST(GelmanRubin, IdenticalChains) {
  Rng rng(1);
  auto c = normal_draws(1000, rng);
  const double r = gelman_rubin({c, c, c, c});
  EXPECT_NEAR(r, std::sqrt(999.0 / 1000.0), 1e-12);
  EXPECT_NEAR(r, 0.9995, 1e-4);
}

TEST(GelmanRubin, SameDistribution) {
  Rng rng(2);
  std::vector<std::vector<double>> chains;
  for (int j = 0; j < 4; ++j) chains.push_back(normal_draws(10000, rng));
  EXPECT_LT(gelman_rubin(chains), 1.01);
}

TEST(GelmanRubin, ConstantChainsUndefined) {
  EXPECT_THROW(gelman_rubin({std::vector<double>(50, 1.0), std::vector<double>(50, 2.0)}),
               DiagnosticUndefined);
  EXPECT_THROW(gelman_rubin({std::vector<double>(50, 1.0)}), InputError);
}

TEST(GelmanRubin, MatchesReferenceOnFixtures) {
  Rng rng(3);
  for (int rep = 0; rep < 5; ++rep) {
    std::vector<std::vector<double>> chains;
    for (int j = 0; j < 3; ++j) {
      auto c = ar1(200, 0.5, rng);
      for (double& v : c) v += 0.3 * j * rep;
      chains.push_back(c);
    }
    EXPECT_NEAR(gelman_rubin(chains), reference_psrf(chains), 1e-10);
  }
}

TEST(EffectiveSampleSize, IidDraws) {
  Rng rng(4);
  auto x = normal_draws(100000, rng);
  EXPECT_NEAR(effective_sample_size(x) / 1e5, 1.0, 0.05);
}

TEST(EffectiveSampleSize, Ar1) {
  Rng rng(5);
  auto x = ar1(100000, 0.9, rng);
  const double expected = (1.0 - 0.9) / (1.0 + 0.9);
  EXPECT_NEAR(effective_sample_size(x) / 1e5 / expected, 1.0, 0.2);
}

TEST(EffectiveSampleSize, Alternating) {
  std::vector<double> x(1000);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = i % 2 == 0 ? 1.0 : -1.0;
  const double ess = effective_sample_size(x);
  EXPECT_TRUE(std::isfinite(ess));
  EXPECT_GT(ess, 1000.0);
}

TEST(EffectiveSampleSize, Errors) {
  EXPECT_THROW(effective_sample_size(std::vector<double>(20, 3.0)), DiagnosticUndefined);
  EXPECT_THROW(effective_sample_size(std::vector<double>(5, 1.0)), InputError);
}

TEST(EffectiveSampleSize, MatchesReferenceOnFixtures) {
  Rng rng(6);
  for (double a : {0.0, 0.3, 0.8, -0.4}) {
    auto x = ar1(500, a, rng);
    EXPECT_NEAR(effective_sample_size(x), reference_ess(x), 1e-10 * reference_ess(x));
  }
}
