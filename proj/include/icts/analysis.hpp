#ifndef ICTS_ANALYSIS_HPP
#define ICTS_ANALYSIS_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <iomanip>
#include <map>
#include <numbers>
#include <ostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "icts/bridge.hpp"
#include "icts/error.hpp"
#include "icts/filter.hpp"
#include "icts/model.hpp"
#include "icts/random.hpp"

namespace icts {

// ---------------------------------------------------------------------------
// Calendar helpers on the seasonal phase

/// Day of year (0-based) of model time t, from the seasonal phase.
inline int day_of_year(long t, const ModelSpec& spec) {
  double s = std::fmod(spec.season_time(t), spec.period_length);
  if (s < 0.0) s += spec.period_length;
  return static_cast<int>(std::floor(s));
}

/// Season index of model time t: the number of whole periods since the phase origin.
inline long season_index(long t, const ModelSpec& spec) {
  return static_cast<long>(std::floor(spec.season_time(t) / spec.period_length));
}

/// Calendar month (0-11) for a 0-based day of year in a 365-day calendar;
/// day 365 counts as December.
inline int month_of_day(int doy) {
  static const int start[12] = {0, 31, 59, 90, 120, 151, 181, 212, 243, 273, 304, 334};
  int m = 11;
  while (m > 0 && doy < start[m]) --m;
  return m;
}

/// "MM-DD" label for a 0-based day of year in a 365-day calendar.
inline std::string month_day_label(int doy) {
  static const int start[12] = {0, 31, 59, 90, 120, 151, 181, 212, 243, 273, 304, 334};
  const int m = month_of_day(std::min(doy, 364));
  const int d = std::min(doy, 364) - start[m] + 1;
  char buf[16];
  std::snprintf(buf, sizeof buf, "%02d-%02d", m + 1, d);
  return buf;
}

inline int day_of_year_from_month_day(int month, int day) {
  static const int start[12] = {0, 31, 59, 90, 120, 151, 181, 212, 243, 273, 304, 334};
  static const int len[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (month < 1 || month > 12 || day < 1 || day > len[month - 1])
    throw InputError("invalid month/day " + std::to_string(month) + "-" + std::to_string(day));
  return start[month - 1] + day - 1;
}

/// A window is the list of model times t (1-based) it covers.
using Window = std::vector<long>;

/// One window per season: `length` consecutive steps starting at the first
/// step with day of year `start_doy`. Windows must lie inside 1..T.
inline std::vector<Window> season_windows(const ModelSpec& spec, long T, int start_doy, int length) {
  if (length < 1) throw InputError("window length must be >= 1");
  std::vector<Window> out;
  for (long t = 1; t + length - 1 <= T; ++t) {
    if (day_of_year(t, spec) != start_doy) continue;
    if (t > 1 && day_of_year(t - 1, spec) == start_doy) continue;
    Window w(length);
    for (int i = 0; i < length; ++i) w[i] = t + i;
    out.push_back(std::move(w));
  }
  return out;
}

/// D for a window: every step in 1..T whose day of year occurs in the window.
inline Window comparison_set(const Window& w, const ModelSpec& spec, long T) {
  std::vector<bool> days(static_cast<std::size_t>(std::ceil(spec.period_length)) + 1, false);
  for (long t : w) days[day_of_year(t, spec)] = true;
  Window D;
  for (long t = 1; t <= T; ++t)
    if (days[day_of_year(t, spec)]) D.push_back(t);
  return D;
}

// ---------------------------------------------------------------------------
// Component attribution

struct WindowMeans {
  double ybar = 0.0;
  double eta = 0.0;       // systematic component mu + sum_k psi_k
  double eta_anom = 0.0;  // eta minus its mean over the comparison set
  double delta = 0.0;     // coupling effect
  double x = 0.0;         // irregular component
  double v = 0.0;         // residual: ybar - eta - delta - x
};

/// Barred quantities for one trajectory (T x dim, row i is t = i + 1).
/// ybar averages the observed steps of the window; the components average
/// every step.
inline WindowMeans window_means(const Matrix& theta, const std::vector<double>& lambda,
                                const Series& y, const Window& w, const Window& D,
                                const ModelSpec& spec) {
  const StateLayout L(spec);
  const long T = theta.rows();
  if (w.empty()) throw InputError("window is empty");
  if (static_cast<long>(lambda.size()) != T || static_cast<long>(y.size()) != T)
    throw InputError("trajectory, lambda and data lengths differ");
  auto eta_at = [&](long t) {
    double e = theta(t - 1, L.mu());
    for (int k = 0; k < L.K; ++k) e += theta(t - 1, L.psi(k));
    return e;
  };
  WindowMeans m;
  double ysum = 0.0;
  int nobs = 0;
  for (long t : w) {
    if (t < 1 || t > T) throw InputError("window index " + std::to_string(t) + " outside 1..T");
    const long i = t - 1;
    m.eta += eta_at(t);
    m.x += theta(i, L.x(0));
    if (L.kind == InterventionKind::Mean) {
      m.delta += lambda[i] * theta(i, L.delta());
    } else if (L.kind == InterventionKind::Autocorrelation) {
      double s = 0.0;
      for (int p = 1; p <= L.P; ++p) s += theta(i, L.delta(p - 1)) * theta(i, L.x(p));
      m.delta += lambda[i] * s;
    }
    if (y[i]) {
      ysum += *y[i];
      ++nobs;
    }
  }
  if (nobs == 0) throw InputError("window has no observed values");
  const double n = static_cast<double>(w.size());
  m.eta /= n;
  m.x /= n;
  m.delta /= n;
  m.ybar = ysum / nobs;
  m.v = m.ybar - m.eta - m.delta - m.x;
  if (!D.empty()) {
    double s = 0.0;
    for (long t : D) {
      if (t < 1 || t > T) throw InputError("comparison index outside 1..T");
      s += eta_at(t);
    }
    m.eta_anom = m.eta - s / static_cast<double>(D.size());
  } else {
    m.eta_anom = m.eta;
  }
  return m;
}

/// Per sample j (outer) and window i (inner).
struct ComponentMeans {
  std::vector<std::vector<WindowMeans>> samples;

  int n_samples() const { return static_cast<int>(samples.size()); }
  int n_windows() const { return samples.empty() ? 0 : static_cast<int>(samples[0].size()); }

  /// Posterior mean of the barred quantities for window i.
  WindowMeans posterior_mean(int i) const {
    WindowMeans out;
    const double J = static_cast<double>(n_samples());
    for (const auto& s : samples) {
      out.ybar += s[i].ybar / J;
      out.eta += s[i].eta / J;
      out.eta_anom += s[i].eta_anom / J;
      out.delta += s[i].delta / J;
      out.x += s[i].x / J;
      out.v += s[i].v / J;
    }
    return out;
  }
};

inline ComponentMeans component_means(const std::vector<Matrix>& trajectories,
                                      const std::vector<std::vector<double>>& lambdas,
                                      const Series& y, const std::vector<Window>& windows,
                                      const ModelSpec& spec) {
  if (trajectories.size() != lambdas.size()) throw InputError("one lambda profile per trajectory is required");
  if (windows.empty()) throw InputError("no windows given");
  ComponentMeans out;
  const long T = static_cast<long>(y.size());
  std::vector<Window> D;
  for (const auto& w : windows) D.push_back(comparison_set(w, spec, T));
  for (std::size_t j = 0; j < trajectories.size(); ++j) {
    std::vector<WindowMeans> row;
    for (std::size_t i = 0; i < windows.size(); ++i)
      row.push_back(window_means(trajectories[j], lambdas[j], y, windows[i], D[i], spec));
    out.samples.push_back(std::move(row));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Analysis of variance

struct Summary {
  double mean = 0.0, lo = 0.0, hi = 0.0;
};

/// Equal-tailed interval from sample quantiles (linear interpolation).
inline double sample_quantile(std::vector<double> v, double p) {
  if (v.empty()) throw InputError("quantile of an empty sample");
  std::sort(v.begin(), v.end());
  const double h = p * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

inline Summary summarise(const std::vector<double>& v, double level = 0.90) {
  Summary s;
  for (double x : v) s.mean += x / static_cast<double>(v.size());
  s.lo = sample_quantile(v, 0.5 * (1.0 - level));
  s.hi = sample_quantile(v, 1.0 - 0.5 * (1.0 - level));
  return s;
}

inline const char* const kAnovaComponents[4] = {"systematic", "coupling", "irregular", "error"};

struct AnovaTable {
  std::vector<std::array<double, 4>> shares;  // per sample
  std::array<Summary, 4> summary;

  /// Table-style display value: shares clamped to [0, 1].
  static double clamped(double s) { return std::clamp(s, 0.0, 1.0); }
};

/// Shares Cov(c, ybar) / Var(ybar) across windows for c in {eta, delta, X, v}.
/// The systematic share uses eta, which has the same covariance with ybar as
/// the anomaly eta* whenever the comparison mean is common to all windows.
inline AnovaTable anova(const ComponentMeans& cm, double level = 0.90) {
  const int n = cm.n_windows();
  if (n < 2) throw InputError("analysis of variance needs at least two windows");
  if (cm.n_samples() < 1) throw InputError("analysis of variance needs at least one sample");
  AnovaTable tab;
  for (const auto& s : cm.samples) {
    double ym = 0.0;
    for (const auto& w : s) ym += w.ybar / n;
    double vy = 0.0;
    std::array<double, 4> cov{0, 0, 0, 0};
    std::array<double, 4> cmean{0, 0, 0, 0};
    for (const auto& w : s) {
      cmean[0] += w.eta / n;
      cmean[1] += w.delta / n;
      cmean[2] += w.x / n;
      cmean[3] += w.v / n;
    }
    for (const auto& w : s) {
      const double dy = w.ybar - ym;
      vy += dy * dy;
      cov[0] += (w.eta - cmean[0]) * dy;
      cov[1] += (w.delta - cmean[1]) * dy;
      cov[2] += (w.x - cmean[2]) * dy;
      cov[3] += (w.v - cmean[3]) * dy;
    }
    if (!(vy > 0.0)) throw InputError("observed window means have zero variance");
    std::array<double, 4> sh;
    for (int c = 0; c < 4; ++c) sh[c] = cov[c] / vy;
    tab.shares.push_back(sh);
  }
  for (int c = 0; c < 4; ++c) {
    std::vector<double> v;
    for (const auto& sh : tab.shares) v.push_back(sh[c]);
    tab.summary[c] = summarise(v, level);
  }
  return tab;
}

// ---------------------------------------------------------------------------
// Posterior predictive checks

/// Least-squares removal of intercept, linear trend and annual and
/// semi-annual harmonics. Missing values stay missing.
inline std::vector<std::optional<double>> deseasonalise(const Series& y, const ModelSpec& spec) {
  const long T = static_cast<long>(y.size());
  std::vector<long> idx;
  for (long i = 0; i < T; ++i)
    if (y[i]) idx.push_back(i);
  if (idx.size() < 6) throw InputError("too few observations to deseasonalise");
  auto row = [&](long i) {
    const double w = spec.omega() * spec.season_time(i + 1);
    Eigen::Matrix<double, 1, 6> r;
    r << 1.0, static_cast<double>(i + 1) / static_cast<double>(T), std::sin(w), std::cos(w),
        std::sin(2 * w), std::cos(2 * w);
    return r;
  };
  Matrix X(idx.size(), 6);
  Vector b(idx.size());
  for (std::size_t k = 0; k < idx.size(); ++k) {
    X.row(k) = row(idx[k]);
    b[k] = *y[idx[k]];
  }
  const Vector coef = X.colPivHouseholderQr().solve(b);
  std::vector<std::optional<double>> out(T);
  for (long i = 0; i < T; ++i)
    if (y[i]) out[i] = *y[i] - row(i).dot(coef.transpose());
  return out;
}

/// Sample autocorrelation at lags 0..max_lag of a zero-mean residual series,
/// using pairs whose first element is selected by `include` (all when empty).
inline std::vector<double> autocorrelation(const Series& r, int max_lag,
                                           const std::vector<bool>& include = {}) {
  const long T = static_cast<long>(r.size());
  double c0 = 0.0, mean = 0.0;
  long n = 0;
  for (long i = 0; i < T; ++i)
    if (r[i] && (include.empty() || include[i])) {
      mean += *r[i];
      ++n;
    }
  if (n < 2) throw InputError("too few values for an autocorrelation");
  mean /= static_cast<double>(n);
  for (long i = 0; i < T; ++i)
    if (r[i] && (include.empty() || include[i])) c0 += (*r[i] - mean) * (*r[i] - mean);
  std::vector<double> acf(max_lag + 1, 0.0);
  if (!(c0 > 0.0)) return acf;
  for (int k = 0; k <= max_lag; ++k) {
    double s = 0.0, sx = 0.0;
    long m = 0;
    for (long i = 0; i + k < T; ++i)
      if (r[i] && r[i + k] && (include.empty() || include[i])) {
        s += (*r[i] - mean) * (*r[i + k] - mean);
        sx += (*r[i] - mean) * (*r[i] - mean);
        ++m;
      }
    acf[k] = m > 0 && sx > 0.0 ? s / sx : 0.0;
  }
  return acf;
}

struct SeriesStats {
  std::array<double, 12> monthly_sd{};                  // inter-annual sd of monthly means
  std::array<std::vector<double>, 12> monthly_acf;      // per-month ACF, lags 0..max_lag
};

/// Statistics used by the predictive checks; month and season come from
/// the phase of spec.
inline SeriesStats series_stats(const Series& y, const ModelSpec& spec, int max_lag) {
  SeriesStats st;
  const long T = static_cast<long>(y.size());
  // monthly means per season
  // sums are taken relative to the first value so a constant series gives exactly 0
  double ref = 0.0;
  for (const auto& v : y)
    if (v) {
      ref = *v;
      break;
    }
  std::map<std::pair<long, int>, std::pair<double, int>> acc;
  for (long i = 0; i < T; ++i) {
    if (!y[i]) continue;
    const long t = i + 1;
    auto& a = acc[{season_index(t, spec), month_of_day(day_of_year(t, spec))}];
    a.first += *y[i] - ref;
    a.second += 1;
  }
  for (int m = 0; m < 12; ++m) {
    std::vector<double> means;
    for (const auto& [key, a] : acc)
      if (key.second == m) means.push_back(a.first / a.second);
    double sd = 0.0;
    if (means.size() >= 2) {
      double mu = 0.0;
      for (double v : means) mu += v;
      mu /= static_cast<double>(means.size());
      for (double v : means) sd += (v - mu) * (v - mu);
      sd = std::sqrt(sd / static_cast<double>(means.size() - 1));
    }
    st.monthly_sd[m] = sd;
  }
  const Series r = deseasonalise(y, spec);
  for (int m = 0; m < 12; ++m) {
    std::vector<bool> inc(T);
    for (long i = 0; i < T; ++i) inc[i] = month_of_day(day_of_year(i + 1, spec)) == m;
    st.monthly_acf[m] = autocorrelation(r, max_lag, inc);
  }
  return st;
}

/// Simulates observations for model times t0..t1 (1-based) from the model,
/// starting from state theta_{t0-1}.
inline std::vector<double> simulate_replicate(const Vector& theta_start, long t0, long t1,
                                              const HyperParams& phi, const ModelSpec& spec,
                                              Rng& rng) {
  const TvarModel model(spec, phi);
  Vector theta = theta_start;
  std::vector<double> out;
  const double vsd = std::sqrt(phi.V);
  for (long t = t0; t <= t1; ++t) {
    const Vector wsd = model.noise_variances(t).cwiseMax(0.0).cwiseSqrt();
    Vector w(wsd.size());
    for (int j = 0; j < w.size(); ++j) w[j] = wsd[j] * standard_normal(rng);
    theta = model.evolve(theta, w, t);
    out.push_back(model.observe(theta, vsd * standard_normal(rng), t));
  }
  return out;
}

struct PpcBand {
  double observed = 0.0;
  Summary replicate;
};

struct PpcResult {
  std::array<PpcBand, 12> sd;                      // per month
  std::array<std::vector<PpcBand>, 12> acf;        // per month, per lag
  int n_replicates = 0;
};

struct PpcInput {
  std::vector<HyperParams> params;   // one per sample
  std::vector<Vector> start_states;  // theta_{t0-1} per sample; empty means draw from prior
  StatePrior prior;
};

/// Runs `fn(j)` for j in [0, n) on a few threads; fn must only write slot j.
template <typename Fn>
void parallel_for(int n, Fn fn) {
  const int workers = std::max(1, std::min<int>(n, static_cast<int>(std::thread::hardware_concurrency())));
  if (workers <= 1) {
    for (int j = 0; j < n; ++j) fn(j);
    return;
  }
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      for (int j = w; j < n; j += workers) fn(j);
    });
  for (auto& t : pool) t.join();
}

/// For each posterior sample, a replicate series over model times t0..t1 is
/// simulated from that sample's theta_{t0-1}; the inter-annual
/// sd of monthly means and the per-month ACFs of the deseasonalised series
/// are compared with those of the observations.
inline PpcResult posterior_predictive_check(const PpcInput& in, const Series& y, const ModelSpec& spec,
                                            long t0, long t1, int max_lag, std::uint64_t seed,
                                            double level = 0.90) {
  if (in.params.empty()) throw InputError("predictive check needs parameter samples");
  if (!in.start_states.empty() && in.start_states.size() != in.params.size())
    throw InputError("predictive check needs one start state per parameter sample");
  const long T = static_cast<long>(y.size());
  if (t0 < 1 || t1 > T || t1 < t0) throw InputError("predictive-check window outside 1..T");
  if (static_cast<double>(t1 - t0 + 1) < 2.0 * spec.period_length)
    throw InputError("predictive checks need at least two years of data");
  ModelSpec wspec = spec;
  wspec.phase_origin = spec.phase_origin + static_cast<double>(t0 - 1);
  Series yobs(y.begin() + (t0 - 1), y.begin() + t1);
  const SeriesStats obs = series_stats(yobs, wspec, max_lag);

  const int J = static_cast<int>(in.params.size());
  std::vector<SeriesStats> rep(J);
  parallel_for(J, [&](int j) {
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(j)));
    Vector start;
    if (!in.start_states.empty()) {
      start = in.start_states[j];
    } else {
      start = in.prior.mean;
      for (int i = 0; i < start.size(); ++i) start[i] += std::sqrt(in.prior.variance[i]) * standard_normal(rng);
    }
    const std::vector<double> ys = simulate_replicate(start, t0, t1, in.params[j], spec, rng);
    rep[j] = series_stats(Series(ys.begin(), ys.end()), wspec, max_lag);
  });

  PpcResult out;
  out.n_replicates = J;
  for (int m = 0; m < 12; ++m) {
    std::vector<double> v;
    for (const auto& r : rep) v.push_back(r.monthly_sd[m]);
    out.sd[m] = {obs.monthly_sd[m], summarise(v, level)};
    out.acf[m].resize(max_lag + 1);
    for (int k = 0; k <= max_lag; ++k) {
      std::vector<double> a;
      for (const auto& r : rep) a.push_back(r.monthly_acf[m][k]);
      out.acf[m][k] = {obs.monthly_acf[m][k], summarise(a, level)};
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Forecast skill

/// Pearson correlation of forecast means and observed window means.
inline double forecast_skill(const std::vector<double>& forecast, const std::vector<double>& observed) {
  if (forecast.size() != observed.size()) throw InputError("forecast and observation counts differ");
  const std::size_t n = forecast.size();
  if (n < 3) throw InputError("forecast skill needs at least 3 pairs");
  double mf = 0.0, mo = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mf += forecast[i] / n;
    mo += observed[i] / n;
  }
  double sff = 0.0, soo = 0.0, sfo = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sff += (forecast[i] - mf) * (forecast[i] - mf);
    soo += (observed[i] - mo) * (observed[i] - mo);
    sfo += (forecast[i] - mf) * (observed[i] - mo);
  }
  if (!(sff > 0.0) || !(soo > 0.0))
    throw DiagnosticUndefined("forecast skill undefined: zero variance in forecasts or observations");
  return sfo / std::sqrt(sff * soo);
}

struct SkillRow {
  int init_doy = 0;
  int n_years = 0;
  double correlation = 0.0;
  std::vector<long> init_times;  // last observed step before each forecast
  std::vector<double> forecast_means, observed_means;
};

/// Rolling-initialisation experiment. For each initialisation day and each
/// season, data after the day before initialisation are withheld (the
/// filter is causal, so the filtered moments at that step use no later
/// data) and the mean of y over the target window is forecast. The target
/// window runs from the initialisation day to the first later step with day
/// of year end_doy, inclusive. Forecast means average over the given
/// parameter samples and `paths` simulated paths per sample.
inline std::vector<SkillRow> forecast_experiment(const Series& y, const ModelSpec& spec,
                                                 const StatePrior& prior,
                                                 const std::vector<HyperParams>& samples,
                                                 const std::vector<int>& init_doys, int end_doy,
                                                 int paths, std::uint64_t seed) {
  if (samples.empty()) throw InputError("forecast experiment needs parameter samples");
  if (paths < 1) throw InputError("forecast experiment needs at least one path per sample");
  const long T = static_cast<long>(y.size());
  struct Target {
    int row;
    long t_init;  // last observed step
    int horizon;
    double observed;
  };
  std::vector<SkillRow> rows(init_doys.size());
  std::vector<Target> targets;
  for (std::size_t r = 0; r < init_doys.size(); ++r) {
    rows[r].init_doy = init_doys[r];
    for (long t = 2; t <= T; ++t) {
      if (day_of_year(t, spec) != init_doys[r] || day_of_year(t - 1, spec) == init_doys[r]) continue;
      long e = t;
      while (e <= T && day_of_year(e, spec) != end_doy) ++e;
      if (e > T) break;
      while (e + 1 <= T && day_of_year(e + 1, spec) == end_doy) ++e;
      double s = 0.0;
      int n = 0;
      for (long u = t; u <= e; ++u)
        if (y[u - 1]) {
          s += *y[u - 1];
          ++n;
        }
      if (n == 0) continue;
      targets.push_back({static_cast<int>(r), t - 1, static_cast<int>(e - t + 1), s / n});
    }
  }
  const int J = static_cast<int>(samples.size());
  std::vector<std::vector<double>> per_sample(J, std::vector<double>(targets.size(), 0.0));
  parallel_for(J, [&](int j) {
    const TvarModel model(spec, samples[j]);
    const FilterResult fr = forward_filter(y, model, prior.mean, prior.covariance(), 0, FilterStorage::Full);
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(j)));
    for (std::size_t k = 0; k < targets.size(); ++k) {
      const FilterStep& st = fr.at(targets[k].t_init);
      ForecastPaths fp = forecast(st.m, st.C, targets[k].t_init, model, targets[k].horizon, paths, rng);
      per_sample[j][k] = fp.observation_mean.mean();
    }
  });
  for (std::size_t k = 0; k < targets.size(); ++k) {
    double f = 0.0;
    for (int j = 0; j < J; ++j) f += per_sample[j][k] / J;
    SkillRow& row = rows[targets[k].row];
    row.init_times.push_back(targets[k].t_init);
    row.forecast_means.push_back(f);
    row.observed_means.push_back(targets[k].observed);
  }
  for (SkillRow& row : rows) {
    row.n_years = static_cast<int>(row.forecast_means.size());
    row.correlation = forecast_skill(row.forecast_means, row.observed_means);
  }
  return rows;
}

// ---------------------------------------------------------------------------
// CSV output

inline void write_anova_csv(std::ostream& os, const std::vector<std::pair<std::string, AnovaTable>>& sets,
                            bool clamp = false) {
  os << "season_set,share,mean,lo90,hi90\n" << std::setprecision(10);
  for (const auto& [name, tab] : sets)
    for (int c = 0; c < 4; ++c) {
      const Summary& s = tab.summary[c];
      auto f = [&](double v) { return clamp ? AnovaTable::clamped(v) : v; };
      os << name << ',' << kAnovaComponents[c] << ',' << f(s.mean) << ',' << f(s.lo) << ',' << f(s.hi) << '\n';
    }
}

inline void write_ppc_sd_csv(std::ostream& os, const PpcResult& r) {
  os << "month,observed,mean,lo90,hi90\n" << std::setprecision(10);
  for (int m = 0; m < 12; ++m)
    os << m + 1 << ',' << r.sd[m].observed << ',' << r.sd[m].replicate.mean << ',' << r.sd[m].replicate.lo
       << ',' << r.sd[m].replicate.hi << '\n';
}

inline void write_ppc_acf_csv(std::ostream& os, const PpcResult& r) {
  os << "month,lag,observed,mean,lo90,hi90\n" << std::setprecision(10);
  for (int m = 0; m < 12; ++m)
    for (std::size_t k = 0; k < r.acf[m].size(); ++k) {
      const PpcBand& b = r.acf[m][k];
      os << m + 1 << ',' << k << ',' << b.observed << ',' << b.replicate.mean << ',' << b.replicate.lo << ','
         << b.replicate.hi << '\n';
    }
}

inline void write_skill_csv(std::ostream& os, const std::vector<SkillRow>& rows) {
  os << "init_date,n_years,correlation\n" << std::setprecision(10);
  for (const SkillRow& r : rows) os << month_day_label(r.init_doy) << ',' << r.n_years << ',' << r.correlation << '\n';
}

/// Per season forecast and observed means behind each correlation.
inline void write_skill_detail_csv(std::ostream& os, const std::vector<SkillRow>& rows) {
  os << "init_date,init_time,forecast_mean,observed_mean\n" << std::setprecision(10);
  for (const SkillRow& r : rows)
    for (std::size_t i = 0; i < r.init_times.size(); ++i)
      os << month_day_label(r.init_doy) << ',' << r.init_times[i] << ',' << r.forecast_means[i] << ','
         << r.observed_means[i] << '\n';
}

inline void write_bayes_factor_csv(std::ostream& os, const BayesFactor& bf, const std::string& name_1,
                                   const std::string& name_2) {
  os << "quantity,value\n" << std::setprecision(12);
  os << "log_ml_" << name_1 << ',' << bf.log_ml_1 << '\n';
  os << "log_ml_" << name_2 << ',' << bf.log_ml_2 << '\n';
  os << "log_bayes_factor," << bf.log_bf << '\n';
  os << "bayes_factor," << bf.bf() << '\n';
  os << "mc_sd_log_bayes_factor," << bf.mc_sd << '\n';
}

}  // namespace icts

#endif  // ICTS_ANALYSIS_HPP
