#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "icts/filter.hpp"
#include "test_support.hpp"

using namespace icts;

namespace {

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

const std::vector<double> kFixedAr = {0.6, -0.2, 0.1, 0.05, -0.05};

ModelSpec linear_spec(InterventionKind kind, int T) {
  ModelSpec spec;
  spec.intervention = kind;
  spec.data_length = T;
  spec.phase_origin = 300.0;
  return spec;
}

StatePrior fixed_ar_prior(const ModelSpec& spec) {
  StatePrior prior = StatePrior::informative(spec);
  const StateLayout L(spec);
  for (int p = 0; p < L.P; ++p) {
    prior.mean[L.phi(p)] = kFixedAr[p];
    prior.variance[L.phi(p)] = 0.0;
  }
  return prior;
}

std::vector<double> synthetic_y(int T, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> y(T);
  for (int t = 0; t < T; ++t) y[t] = 6.0 + 3.0 * std::sin(0.1 * t) + standard_normal(rng);
  return y;
}

Series as_series(const std::vector<double>& y) { return Series(y.begin(), y.end()); }

double scaled_diff(double a, double b) { return std::abs(a - b) / (1.0 + std::abs(b)); }

}  // namespace

TEST(LocalLevel, SingleStepByHand) {
  auto model = LinearGaussianModel::local_level(1.0, 1.0);
  FilterResult fr = forward_filter(Series{1.0}, model, Vector::Zero(1), Matrix::Ones(1, 1));
  const FilterStep& s = fr.at(1);
  EXPECT_NEAR(s.a[0], 0.0, 1e-12);
  EXPECT_NEAR(s.R(0, 0), 2.0, 1e-12);
  EXPECT_NEAR(s.Q, 3.0, 1e-12);
  EXPECT_NEAR(s.A[0], 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(s.m[0], 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(s.C(0, 0), 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(fr.log_marginal_likelihood, -1.63491, 1e-5);
  EXPECT_NEAR(fr.log_marginal_likelihood, -0.5 * (std::log(2 * std::numbers::pi * 3.0) + 1.0 / 3.0),
              1e-12);
}

TEST(ForwardFilter, AllMissingPropagatesPrior) {
  ModelSpec spec;
  spec.intervention = InterventionKind::Mean;
  spec.data_length = 30;
  HyperParams phi = linear_params();
  phi.W_phi = 1e-6;
  StatePrior prior = StatePrior::informative(spec);
  FilterResult fr = forward_filter(Series(30), phi, spec, prior);
  EXPECT_EQ(fr.log_marginal_likelihood, 0.0);
  Vector m = prior.mean;
  Matrix C = prior.covariance();
  for (int t = 1; t <= 30; ++t) {
    Matrix G, H;
    evolution_jacobians(m, spec, phi, G, H);
    Vector W = evolution_noise_variances(t, spec, phi);
    C = G * C * G.transpose() + H * W.asDiagonal() * H.transpose();
    m = evolution_fn(m, Vector::Zero(W.size()), spec, phi);
    const FilterStep& s = fr.at(t);
    EXPECT_LT((s.m - m).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LT((s.C - C).cwiseAbs().maxCoeff() / (1.0 + C.cwiseAbs().maxCoeff()), 1e-12);
    EXPECT_TRUE(s.A.isZero());
  }
}

class LinearOracleTest : public ::testing::TestWithParam<InterventionKind> {};

TEST_P(LinearOracleTest, MatchesDenseKalman) {
  const int T = 50;
  const ModelSpec spec = linear_spec(GetParam(), T);
  const HyperParams phi = linear_params();
  const StatePrior prior = fixed_ar_prior(spec);
  const std::vector<double> y = synthetic_y(T, 11);

  FilterResult fr = forward_filter(as_series(y), phi, spec, prior);
  auto oracle_model = oracle::make_reduced_model(spec, phi, kFixedAr, prior, T);
  auto dense = oracle::dense_kalman(oracle_model, y);

  EXPECT_NEAR(fr.log_marginal_likelihood, dense.loglik, 1e-9);
  const auto& idx = oracle_model.full_index;
  for (int t = 1; t <= T; ++t) {
    const FilterStep& s = fr.at(t);
    for (std::size_t i = 0; i < idx.size(); ++i) {
      EXPECT_LT(scaled_diff(s.m[idx[i]], dense.m[t - 1][i]), 1e-9);
      for (std::size_t j = 0; j < idx.size(); ++j)
        EXPECT_LT(scaled_diff(s.C(idx[i], idx[j]), dense.C[t - 1](i, j)), 1e-9);
    }
  }
}

TEST_P(LinearOracleTest, LogLikelihoodMatchesJointGaussian) {
  const int T = 10;
  const ModelSpec spec = linear_spec(GetParam(), T);
  const HyperParams phi = linear_params();
  const StatePrior prior = fixed_ar_prior(spec);
  const std::vector<double> y = synthetic_y(T, 12);
  auto mdl = oracle::make_reduced_model(spec, phi, kFixedAr, prior, T);
  auto J = oracle::joint_gaussian(mdl, T);
  const double ref = oracle::mvn_logpdf(Eigen::Map<const Vector>(y.data(), T), J.mean_y, J.cov_y);
  EXPECT_NEAR(log_marginal_likelihood(as_series(y), phi, spec, prior), ref, 1e-8);
}

TEST_P(LinearOracleTest, SmootherMomentsMatchJointConditioning) {
  const int T = 50;
  const ModelSpec spec = linear_spec(GetParam(), T);
  const HyperParams phi = linear_params();
  const StatePrior prior = fixed_ar_prior(spec);
  const std::vector<double> y = synthetic_y(T, 13);
  FilterResult fr = forward_filter(as_series(y), phi, spec, prior);
  BackwardSampler bs(fr, phi, spec);
  std::vector<Vector> mean;
  std::vector<Matrix> cov;
  bs.moments(mean, cov);

  auto mdl = oracle::make_reduced_model(spec, phi, kFixedAr, prior, T);
  auto J = oracle::joint_gaussian(mdl, T);
  Eigen::LDLT<Matrix> ldlt(J.cov_y);
  Vector cond_mean = J.mean_theta +
                     J.cov_theta_y * ldlt.solve(Eigen::Map<const Vector>(y.data(), T) - J.mean_y);
  Matrix cond_cov = J.cov_theta - J.cov_theta_y * ldlt.solve(J.cov_theta_y.transpose());
  const int n = mdl.n;
  const auto& idx = mdl.full_index;
  for (int t = 0; t < T; ++t)
    for (int i = 0; i < n; ++i) {
      EXPECT_LT(scaled_diff(mean[t][idx[i]], cond_mean[t * n + i]), 1e-9) << "t=" << t << " i=" << i;
      for (int j = 0; j < n; ++j)
        EXPECT_LT(scaled_diff(cov[t](idx[i], idx[j]), cond_cov(t * n + i, t * n + j)), 1e-9)
            << "t=" << t << " i=" << i << " j=" << j;
    }
}

INSTANTIATE_TEST_SUITE_P(Variants, LinearOracleTest,
                         ::testing::Values(InterventionKind::None, InterventionKind::Mean));

TEST(BackwardSample, MonteCarloMeanMatchesJointGaussian) {
  const int T = 5;
  ModelSpec spec;
  spec.harmonics = 1;
  spec.tvar_order = 2;
  spec.data_length = T;
  HyperParams phi = linear_params();
  phi.W_mu = 0.05;
  phi.W_psi = 0.05;
  phi.W_beta = 1e-4;
  StatePrior prior = StatePrior::vague(spec);
  const StateLayout L(spec);
  const std::vector<double> ar = {0.5, -0.3};
  for (int p = 0; p < 2; ++p) {
    prior.mean[L.phi(p)] = ar[p];
    prior.variance[L.phi(p)] = 0.0;
  }
  const std::vector<double> y = {1.0, -0.5, 2.0, 0.3, 1.1};
  FilterResult fr = forward_filter(as_series(y), phi, spec, prior);
  BackwardSampler bs(fr, phi, spec);

  auto mdl = oracle::make_reduced_model(spec, phi, ar, prior, T);
  auto J = oracle::joint_gaussian(mdl, T);
  Eigen::LDLT<Matrix> ldlt(J.cov_y);
  Vector cond_mean = J.mean_theta +
                     J.cov_theta_y * ldlt.solve(Eigen::Map<const Vector>(y.data(), T) - J.mean_y);
  Matrix cond_cov = J.cov_theta - J.cov_theta_y * ldlt.solve(J.cov_theta_y.transpose());

  const int N = 50000, n = mdl.n;
  Rng rng(2024);
  Matrix sum = Matrix::Zero(T, L.dim());
  for (int j = 0; j < N; ++j) sum += bs.sample(rng);
  sum /= N;
  for (int t = 0; t < T; ++t)
    for (int i = 0; i < n; ++i) {
      const double se = std::sqrt(cond_cov(t * n + i, t * n + i) / N);
      EXPECT_LT(std::abs(sum(t, mdl.full_index[i]) - cond_mean[t * n + i]), 3.0 * se + 1e-12)
          << "t=" << t << " i=" << i;
    }
}

TEST(BackwardSample, SingleStepIsFilteredDraw) {
  auto model = LinearGaussianModel::local_level(1.0, 1.0);
  FilterResult fr = forward_filter(Series{1.0}, model, Vector::Zero(1), Matrix::Ones(1, 1));
  BackwardSampler bs(fr, model);
  Rng rng(5);
  const int N = 40000;
  double s = 0, s2 = 0;
  for (int j = 0; j < N; ++j) {
    const double v = bs.sample(rng)(0, 0);
    s += v;
    s2 += v * v;
  }
  const double mean = s / N, var = s2 / N - mean * mean;
  EXPECT_NEAR(mean, 2.0 / 3.0, 4.0 * std::sqrt(2.0 / 3.0 / N));
  EXPECT_NEAR(var, 2.0 / 3.0, 0.03);
}

TEST(BackwardSample, ZeroNoiseIsDeterministicPropagation) {
  // local linear trend plus a rotating pair, no evolution noise
  Matrix G = Matrix::Zero(4, 4);
  G << 1, 1, 0, 0, 0, 1, 0, 0, 0, 0, std::cos(0.3), std::sin(0.3), 0, 0, -std::sin(0.3),
      std::cos(0.3);
  Vector F(4);
  F << 1, 0, 1, 0;
  LinearGaussianModel model(G, Matrix::Identity(4, 4), Vector::Zero(4), F, 0.5);
  Series y = {1.0, 2.0, 2.5, 4.0, 3.0, 5.5, 6.0};
  FilterResult fr = forward_filter(y, model, Vector::Zero(4), Matrix::Identity(4, 4) * 4.0);
  BackwardSampler bs(fr, model);
  Rng rng(9);
  for (int rep = 0; rep < 20; ++rep) {
    Matrix traj = bs.sample(rng);
    for (int t = 0; t + 1 < traj.rows(); ++t) {
      Vector next = G * traj.row(t).transpose();
      EXPECT_LT((next - traj.row(t + 1).transpose()).cwiseAbs().maxCoeff(), 1e-8);
    }
  }
}

TEST(Forecast, LocalLevelPredictiveVariance) {
  const double C = 0.7, W = 0.2, V = 0.5;
  auto model = LinearGaussianModel::local_level(V, W);
  Rng rng(77);
  const int h = 10;
  ForecastPaths fp = forecast(Vector::Constant(1, 1.0), Matrix::Constant(1, 1, C), 0, model, h,
                              100000, rng);
  for (int k = 1; k <= h; ++k) {
    const Vector col = fp.observations.col(k - 1);
    const double mean = col.mean();
    const double var = (col.array() - mean).square().sum() / (col.size() - 1);
    EXPECT_NEAR(var / (C + k * W + V), 1.0, 0.05) << "k=" << k;
    EXPECT_NEAR(fp.observation_mean[k - 1], mean, 1e-12);
  }
}

TEST(Forecast, ZeroVarianceIsDeterministic) {
  Matrix G(2, 2);
  G << 1, 1, 0, 1;
  Vector F(2);
  F << 1, 0;
  LinearGaussianModel model(G, Matrix::Identity(2, 2), Vector::Zero(2), F, 0.0);
  Vector m(2);
  m << 3.0, 0.5;
  Rng rng(3);
  ForecastPaths fp = forecast(m, Matrix::Zero(2, 2), 0, model, 8, 50, rng);
  for (int k = 1; k <= 8; ++k) {
    EXPECT_NEAR(fp.observations.col(k - 1).maxCoeff() - fp.observations.col(k - 1).minCoeff(), 0.0,
                1e-15);
    EXPECT_NEAR(fp.observation_mean[k - 1], 3.0 + 0.5 * k, 1e-12);
  }
}

TEST(Forecast, SeasonalStateReturnsAfterOnePeriod) {
  ModelSpec spec;
  spec.harmonics = 2;
  spec.tvar_order = 1;
  spec.period_length = 365.0;
  spec.data_length = 10;
  HyperParams phi = linear_params();
  phi.W_mu = phi.W_psi = phi.W_beta = phi.W_phi = 0.0;
  const StateLayout L(spec);
  Rng rng(1);
  Vector m = standard_normal_vector(L.dim(), rng);
  m[L.phi(0)] = 0.5;
  ForecastPaths fp = forecast(m, Matrix::Zero(L.dim(), L.dim()), 0, phi, spec, 365, 3, rng, true);
  for (const Matrix& path : fp.states)
    for (int k = 0; k < L.K; ++k) {
      EXPECT_NEAR(path(364, L.psi(k)), m[L.psi(k)], 1e-9);
      EXPECT_NEAR(path(364, L.psi_star(k)), m[L.psi_star(k)], 1e-9);
    }
}

TEST(LogLikelihood, LargerVAbsorbsOutlier) {
  Series y(30, 0.0);
  y[15] = 20.0;
  double ll[2];
  for (int i = 0; i < 2; ++i) {
    auto model = LinearGaussianModel::local_level(i == 0 ? 1.0 : 2.0, 0.01);
    ll[i] = forward_filter(y, model, Vector::Zero(1), Matrix::Ones(1, 1)).log_marginal_likelihood;
  }
  EXPECT_GT(ll[1], ll[0]);
}

TEST(LogLikelihood, ConcatenationProperty) {
  ModelSpec spec;
  spec.intervention = InterventionKind::Autocorrelation;
  spec.data_length = 120;
  spec.phase_origin = 280.0;
  HyperParams phi = linear_params();
  phi.W_phi = 1e-5;
  StatePrior prior = StatePrior::informative(spec);
  std::vector<double> yv = synthetic_y(120, 21);
  Series y = as_series(yv);
  y[40] = std::nullopt;
  TvarModel model(spec, phi);
  FilterResult whole = forward_filter(y, model, prior.mean, prior.covariance());
  for (int cut : {1, 37, 60, 119}) {
    Series head(y.begin(), y.begin() + cut), tail(y.begin() + cut, y.end());
    FilterResult a = forward_filter(head, model, prior.mean, prior.covariance());
    FilterResult b = forward_filter(tail, model, a.m_last, a.C_last, cut);
    EXPECT_NEAR(a.log_marginal_likelihood + b.log_marginal_likelihood,
                whole.log_marginal_likelihood, 1e-10);
  }
}

TEST(ForwardFilter, CovarianceInvariants) {
  ModelSpec spec;
  spec.intervention = InterventionKind::Autocorrelation;
  spec.data_length = 200;
  HyperParams phi = linear_params();
  phi.W_phi = 1e-6;
  phi.alpha = 20;
  StatePrior prior = StatePrior::informative(spec);
  FilterResult fr = forward_filter(as_series(synthetic_y(200, 4)), phi, spec, prior);
  for (const FilterStep& s : fr.steps) {
    EXPECT_GT(s.Q, 0.0);
    EXPECT_LT((s.C - s.C.transpose()).cwiseAbs().maxCoeff(), 1e-10);
    Eigen::SelfAdjointEigenSolver<Matrix> es(s.R - s.C);
    EXPECT_GT(es.eigenvalues().minCoeff(), -1e-8 * (1.0 + s.R.diagonal().maxCoeff()));
    Eigen::SelfAdjointEigenSolver<Matrix> ec(s.C);
    EXPECT_GT(ec.eigenvalues().minCoeff(), -1e-8 * (1.0 + s.C.diagonal().maxCoeff()));
  }
}

TEST(ForwardFilter, Errors) {
  auto model = LinearGaussianModel::local_level(1.0, 1.0);
  Series bad = {1.0, std::numeric_limits<double>::quiet_NaN()};
  try {
    forward_filter(bad, model, Vector::Zero(1), Matrix::Ones(1, 1));
    FAIL();
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("index 2"), std::string::npos);
  }
  auto degenerate = LinearGaussianModel::local_level(0.0, 0.0);
  try {
    forward_filter(Series{1.0, 2.0}, degenerate, Vector::Zero(1), Matrix::Zero(1, 1));
    FAIL();
  } catch (const NumericalFailure& e) {
    EXPECT_EQ(e.time_index(), 1);
  }
}

TEST(Determinism, SameSeedSameDraws) {
  ModelSpec spec;
  spec.data_length = 60;
  HyperParams phi = linear_params();
  phi.W_phi = 1e-6;
  StatePrior prior = StatePrior::informative(spec);
  FilterResult fr = forward_filter(as_series(synthetic_y(60, 8)), phi, spec, prior);
  Rng r1(42), r2(42);
  Matrix t1 = backward_sample(fr, phi, spec, r1);
  Matrix t2 = backward_sample(fr, phi, spec, r2);
  EXPECT_TRUE((t1.array() == t2.array()).all());
  ForecastPaths f1 = forecast(fr.m_last, fr.C_last, 60, phi, spec, 20, 10, r1);
  ForecastPaths f2 = forecast(fr.m_last, fr.C_last, 60, phi, spec, 20, 10, r2);
  EXPECT_TRUE((f1.observations.array() == f2.observations.array()).all());
}
