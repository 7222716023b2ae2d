#ifndef ICTS_MCMC_HPP
#define ICTS_MCMC_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "icts/diagnostics.hpp"
#include "icts/error.hpp"
#include "icts/filter.hpp"
#include "icts/linalg.hpp"
#include "icts/model.hpp"
#include "icts/random.hpp"

namespace icts {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// Prior densities

struct PriorDist {
  enum class Kind { Normal, Flat, Uniform, Triangular, Beta };
  Kind kind = Kind::Flat;
  double p1 = 0.0;  // Normal mean, Uniform/Triangular lower, Beta a
  double p2 = 1.0;  // Normal sd, Uniform/Triangular upper, Beta b
  double p3 = 0.0;  // Triangular mode

  static PriorDist normal(double mean, double sd) { return {Kind::Normal, mean, sd, 0.0}; }
  static PriorDist flat() { return {Kind::Flat, 0.0, 0.0, 0.0}; }
  static PriorDist uniform(double lo, double hi) { return {Kind::Uniform, lo, hi, 0.0}; }
  static PriorDist triangular(double lo, double hi, double mode) {
    return {Kind::Triangular, lo, hi, mode};
  }
  static PriorDist beta(double a, double b) { return {Kind::Beta, a, b, 0.0}; }

  bool proper() const { return kind != Kind::Flat; }

  void validate(const std::string& name) const {
    auto bad = [&](const std::string& why) { throw InputError("prior for " + name + ": " + why); };
    switch (kind) {
      case Kind::Normal:
        if (!(p2 > 0.0) || !std::isfinite(p1)) bad("normal needs a finite mean and sd > 0");
        break;
      case Kind::Flat: break;
      case Kind::Uniform:
        if (!(p2 > p1)) bad("uniform needs lower < upper");
        break;
      case Kind::Triangular:
        if (!(p2 > p1) || p3 < p1 || p3 > p2) bad("triangular needs lower <= mode <= upper, lower < upper");
        break;
      case Kind::Beta:
        if (!(p1 > 0.0 && p2 > 0.0)) bad("beta needs positive shape parameters");
        break;
    }
  }

  double log_density(double x) const {
    if (!std::isfinite(x)) return kNegInf;
    switch (kind) {
      case Kind::Normal: {
        const double u = (x - p1) / p2;
        return -0.5 * u * u - std::log(p2) - 0.5 * std::log(2.0 * std::numbers::pi);
      }
      case Kind::Flat: return 0.0;
      case Kind::Uniform: return x >= p1 && x <= p2 ? -std::log(p2 - p1) : kNegInf;
      case Kind::Triangular: {
        if (x < p1 || x > p2) return kNegInf;
        const double w = p2 - p1;
        const double d = x < p3 ? 2.0 * (x - p1) / (w * (p3 - p1)) : 2.0 * (p2 - x) / (w * (p2 - p3));
        return d > 0.0 ? std::log(d) : kNegInf;
      }
      case Kind::Beta: {
        if (x < 0.0 || x > 1.0) return kNegInf;
        const double lb = std::lgamma(p1) + std::lgamma(p2) - std::lgamma(p1 + p2);
        const double l1 = p1 == 1.0 ? 0.0 : (p1 - 1.0) * std::log(x);
        const double l2 = p2 == 1.0 ? 0.0 : (p2 - 1.0) * std::log1p(-x);
        return l1 + l2 - lb;
      }
    }
    return kNegInf;
  }

  double sample(Rng& rng) const {
    switch (kind) {
      case Kind::Normal: return p1 + p2 * standard_normal(rng);
      case Kind::Flat: throw InputError("cannot sample from a flat prior");
      case Kind::Uniform: return p1 + (p2 - p1) * uniform01(rng);
      case Kind::Triangular: {
        const double u = uniform01(rng), w = p2 - p1, f = (p3 - p1) / w;
        return u < f ? p1 + std::sqrt(u * w * (p3 - p1)) : p2 - std::sqrt((1.0 - u) * w * (p2 - p3));
      }
      case Kind::Beta: {
        std::gamma_distribution<double> ga(p1, 1.0), gb(p2, 1.0);
        const double x = ga(rng), y = gb(rng);
        return x / (x + y);
      }
    }
    return 0.0;
  }

  std::string describe() const {
    std::ostringstream os;
    switch (kind) {
      case Kind::Normal: os << "normal(" << p1 << ", " << p2 << "^2)"; break;
      case Kind::Flat: os << "flat"; break;
      case Kind::Uniform: os << "uniform(" << p1 << ", " << p2 << ")"; break;
      case Kind::Triangular: os << "triangular(" << p1 << ", " << p2 << ", mode " << p3 << ")"; break;
      case Kind::Beta: os << "beta(" << p1 << ", " << p2 << ")"; break;
    }
    return os.str();
  }
};

inline PriorDist::Kind prior_kind_from_string(const std::string& s) {
  if (s == "normal") return PriorDist::Kind::Normal;
  if (s == "flat") return PriorDist::Kind::Flat;
  if (s == "uniform") return PriorDist::Kind::Uniform;
  if (s == "triangular") return PriorDist::Kind::Triangular;
  if (s == "beta") return PriorDist::Kind::Beta;
  throw InputError("unknown prior kind '" + s + "'");
}

inline std::string to_string(PriorDist::Kind k) {
  switch (k) {
    case PriorDist::Kind::Normal: return "normal";
    case PriorDist::Kind::Flat: return "flat";
    case PriorDist::Kind::Uniform: return "uniform";
    case PriorDist::Kind::Triangular: return "triangular";
    case PriorDist::Kind::Beta: return "beta";
  }
  return "flat";
}

// ---------------------------------------------------------------------------
// Transforms between z and the hyper-parameters

enum class Transform { Log, Logit, Identity };

inline double logistic(double z) {
  return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

inline double logit(double p) { return std::log(p) - std::log1p(-p); }

/// log |d x / d z| for the logit transform: log s(z) + log(1 - s(z)).
inline double logit_log_jacobian(double z) {
  return -std::abs(z) - 2.0 * std::log1p(std::exp(-std::abs(z)));
}

inline double to_natural(Transform t, double z) {
  switch (t) {
    case Transform::Log: return std::exp(z);
    case Transform::Logit: return logistic(z);
    case Transform::Identity: return z;
  }
  return z;
}

inline double to_unconstrained(Transform t, double x) {
  switch (t) {
    case Transform::Log: return std::log(x);
    case Transform::Logit: return logit(x);
    case Transform::Identity: return x;
  }
  return x;
}

enum class HyperField { V, W_mu, W_beta, W_psi, W_phi, W_X, a, b, alpha, gamma, rho, varphi, W_delta };

inline double& field_ref(HyperParams& phi, HyperField f) {
  switch (f) {
    case HyperField::V: return phi.V;
    case HyperField::W_mu: return phi.W_mu;
    case HyperField::W_beta: return phi.W_beta;
    case HyperField::W_psi: return phi.W_psi;
    case HyperField::W_phi: return phi.W_phi;
    case HyperField::W_X: return phi.W_X;
    case HyperField::a: return phi.a;
    case HyperField::b: return phi.b;
    case HyperField::alpha: return phi.alpha;
    case HyperField::gamma: return phi.gamma;
    case HyperField::rho: return phi.rho;
    case HyperField::varphi: return phi.varphi;
    case HyperField::W_delta: return phi.W_delta;
  }
  return phi.V;
}

/// One sampled hyper-parameter. For log-transformed variances the prior is
/// on z = log W; for every other transform it is on the natural scale.
struct ParamSpec {
  std::string name;          // z-scale name, e.g. logWmu
  std::string natural_name;  // natural-scale name, e.g. W_mu
  HyperField field;
  Transform transform;
  PriorDist prior;
  PriorDist init;  // used to draw initial values when the prior is flat
  double proposal_variance = 0.01;

  double log_prior(double z) const {
    if (transform == Transform::Log) return prior.log_density(z);
    const double x = to_natural(transform, z);
    double lp = prior.log_density(x);
    if (transform == Transform::Logit && lp > kNegInf) lp += logit_log_jacobian(z);
    return lp;
  }

  double sample_initial(Rng& rng) const {
    const PriorDist& d = prior.proper() ? prior : init;
    for (int attempt = 0; attempt < 1000; ++attempt) {
      const double draw = d.sample(rng);
      const double z = transform == Transform::Log ? draw : to_unconstrained(transform, draw);
      if (std::isfinite(z) && std::isfinite(log_prior(z))) return z;
    }
    throw InputError("could not draw an initial value for " + name);
  }
};

/// The sampled hyper-parameters and their priors. W_psi is tied to W_mu
/// unless tie_psi is false, in which case logWpsi is sampled as well.
class ParameterSet {
 public:
  std::vector<ParamSpec> params;
  bool tie_psi = true;

  /// Informative defaults for a daily pressure-difference index.
  static ParameterSet informative(InterventionKind kind) {
    ParameterSet s;
    auto add = [&](std::string n, std::string nn, HyperField f, Transform t, PriorDist p,
                   PriorDist init = PriorDist::normal(0.0, 1.0)) {
      s.params.push_back({std::move(n), std::move(nn), f, t, p, init});
    };
    add("logV", "V", HyperField::V, Transform::Log, PriorDist::normal(-10, 3));
    add("logWmu", "W_mu", HyperField::W_mu, Transform::Log, PriorDist::normal(-12, 3));
    add("logWbeta", "W_beta", HyperField::W_beta, Transform::Log, PriorDist::normal(-28, 3));
    add("logWX", "W_X", HyperField::W_X, Transform::Log, PriorDist::normal(0, 1));
    add("a", "a", HyperField::a, Transform::Identity, PriorDist::normal(0.5, 1));
    add("b", "b", HyperField::b, Transform::Identity, PriorDist::normal(2.0, 1));
    add("logWphi", "W_phi", HyperField::W_phi, Transform::Log, PriorDist::normal(-18, 3));
    if (kind != InterventionKind::None) {
      add("alpha", "alpha", HyperField::alpha, Transform::Identity,
          PriorDist::triangular(120, 485, 305));
      add("gamma", "gamma", HyperField::gamma, Transform::Identity,
          PriorDist::triangular(0, 365, 180));
      add("rho", "rho", HyperField::rho, Transform::Logit, PriorDist::beta(4, 6));
      if (kind == InterventionKind::Mean) {
        add("logWdelta", "W_delta", HyperField::W_delta, Transform::Log, PriorDist::normal(-8, 4));
        add("varphi", "varphi", HyperField::varphi, Transform::Logit, PriorDist::beta(4, 1));
      } else {
        add("logWdelta", "W_delta", HyperField::W_delta, Transform::Log, PriorDist::normal(-16, 4));
        add("varphi", "varphi", HyperField::varphi, Transform::Logit, PriorDist::beta(45, 1));
      }
    }
    s.set_default_proposal();
    return s;
  }

  /// Sensitivity-analysis presets: flat or uniform priors on the shape
  /// parameters and vague normals on the log-variances. Flat priors take
  /// their initial values from the informative preset.
  static ParameterSet vague(InterventionKind kind) {
    ParameterSet s = informative(kind);
    for (ParamSpec& p : s.params) {
      p.init = p.prior;
      if (p.name == "logV") p.prior = PriorDist::normal(0, 8);
      else if (p.name == "logWmu") p.prior = PriorDist::normal(0, 9);
      else if (p.name == "logWbeta") p.prior = PriorDist::normal(0, 17);
      else if (p.name == "logWX" || p.name == "a" || p.name == "b") p.prior = PriorDist::flat();
      else if (p.name == "logWphi") p.prior = PriorDist::normal(0, 12);
      else if (p.name == "alpha" || p.name == "gamma") p.prior = PriorDist::uniform(0, 365);
      else if (p.name == "rho" || p.name == "varphi") p.prior = PriorDist::uniform(0, 1);
      else if (p.name == "logWdelta")
        p.prior = PriorDist::normal(0, kind == InterventionKind::Mean ? 8 : 12);
    }
    return s;
  }

  static ParameterSet preset(const std::string& name, InterventionKind kind) {
    if (name == "informative") return informative(kind);
    if (name == "vague") return vague(kind);
    throw InputError("unknown prior preset '" + name + "' (expected informative|vague)");
  }

  /// Adds logWpsi with the logWmu prior and unties W_psi.
  void untie_psi() {
    if (!tie_psi) return;
    tie_psi = false;
    ParamSpec p = at("logWmu");
    p.name = "logWpsi";
    p.natural_name = "W_psi";
    p.field = HyperField::W_psi;
    params.insert(params.begin() + index("logWmu") + 1, p);
  }

  /// Identity-scale day-of-year parameters move on a scale of days.
  void set_default_proposal() {
    for (ParamSpec& p : params)
      p.proposal_variance = (p.name == "alpha" || p.name == "gamma") ? 4.0 : 0.01;
  }

  int dim() const { return static_cast<int>(params.size()); }

  int index(const std::string& name) const {
    for (int i = 0; i < dim(); ++i)
      if (params[i].name == name) return i;
    throw InputError("unknown hyper-parameter '" + name + "'");
  }
  bool has(const std::string& name) const {
    for (const auto& p : params)
      if (p.name == name) return true;
    return false;
  }
  ParamSpec& at(const std::string& name) { return params[index(name)]; }
  const ParamSpec& at(const std::string& name) const { return params[index(name)]; }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (const auto& p : params) out.push_back(p.name);
    return out;
  }
  std::vector<std::string> natural_names() const {
    std::vector<std::string> out;
    for (const auto& p : params) out.push_back(p.natural_name);
    return out;
  }

  void validate() const {
    for (const auto& p : params) {
      p.prior.validate(p.name);
      if (!p.prior.proper()) p.init.validate(p.name + " (init)");
      if (!(p.proposal_variance > 0.0))
        throw InputError("proposal variance for " + p.name + " must be > 0");
    }
  }

  HyperParams natural(const Vector& z, const HyperParams& base = {}) const {
    HyperParams phi = base;
    for (int i = 0; i < dim(); ++i)
      field_ref(phi, params[i].field) = to_natural(params[i].transform, z[i]);
    if (tie_psi) phi.W_psi = phi.W_mu;
    return phi;
  }

  Vector unconstrained(const HyperParams& phi) const {
    HyperParams copy = phi;
    Vector z(dim());
    for (int i = 0; i < dim(); ++i)
      z[i] = to_unconstrained(params[i].transform, field_ref(copy, params[i].field));
    return z;
  }

  /// Natural-scale values in parameter order.
  Vector natural_vector(const Vector& z) const {
    Vector x(dim());
    for (int i = 0; i < dim(); ++i) x[i] = to_natural(params[i].transform, z[i]);
    return x;
  }

  double log_prior(const Vector& z) const {
    double lp = 0.0;
    for (int i = 0; i < dim(); ++i) {
      lp += params[i].log_prior(z[i]);
      if (!(lp > kNegInf)) return kNegInf;
    }
    return lp;
  }

  Vector sample_initial(Rng& rng) const {
    Vector z(dim());
    for (int i = 0; i < dim(); ++i) z[i] = params[i].sample_initial(rng);
    return z;
  }

  Matrix proposal_covariance() const {
    Vector d(dim());
    for (int i = 0; i < dim(); ++i) d[i] = params[i].proposal_variance;
    return d.asDiagonal();
  }
};

// ---------------------------------------------------------------------------
// Posterior

/// Unnormalised log posterior of z for the state-space model.
class ModelPosterior {
 public:
  ModelPosterior(Series y, ModelSpec spec, StatePrior prior, ParameterSet params,
                 HyperParams base = {})
      : y_(std::move(y)), spec_(spec), prior_(std::move(prior)), params_(std::move(params)),
        base_(base) {
    spec_.data_length = static_cast<int>(y_.size());
    spec_.validate();
    prior_.validate(spec_);
    params_.validate();
  }

  int dim() const { return params_.dim(); }
  const ParameterSet& parameters() const { return params_; }
  const ModelSpec& spec() const { return spec_; }
  const StatePrior& state_prior() const { return prior_; }
  const Series& data() const { return y_; }
  HyperParams natural(const Vector& z) const { return params_.natural(z, base_); }

  /// Prior plus Jacobian; -inf outside the support of Phi.
  double log_prior(const Vector& z) const {
    const double lp = params_.log_prior(z);
    if (!(lp > kNegInf)) return kNegInf;
    try {
      natural(z).validate(spec_);
    } catch (const InputError&) {
      return kNegInf;
    }
    return lp;
  }

  double log_likelihood(const Vector& z) const {
    return log_marginal_likelihood(y_, natural(z), spec_, prior_);
  }

  /// Numerical failures of the filter give -inf, so proposals there are
  /// rejected.
  double log_density(const Vector& z) const {
    const double lp = log_prior(z);
    if (!(lp > kNegInf)) return kNegInf;
    try {
      const double ll = log_likelihood(z);
      return std::isfinite(ll) ? ll + lp : kNegInf;
    } catch (const NumericalFailure&) {
      return kNegInf;
    } catch (const DomainError&) {
      return kNegInf;
    }
  }

  Vector initial(Rng& rng) const { return params_.sample_initial(rng); }

 private:
  Series y_;
  ModelSpec spec_;
  StatePrior prior_;
  ParameterSet params_;
  HyperParams base_;
};

inline double log_posterior(const Vector& z, const Series& y, const ModelSpec& spec,
                            const StatePrior& prior, const ParameterSet& params) {
  return ModelPosterior(y, spec, prior, params).log_density(z);
}

// ---------------------------------------------------------------------------
// Metropolis-Hastings building blocks

template <typename T>
concept SamplingTarget = requires(const T& t, const Vector& z, Rng& rng) {
  { t.dim() } -> std::convertible_to<int>;
  { t.log_density(z) } -> std::convertible_to<double>;
  { t.initial(rng) } -> std::convertible_to<Vector>;
};

struct ChainState {
  Vector z;
  double log_post = kNegInf;
  Matrix proposal_cov;
  Matrix proposal_chol;  // lower Cholesky factor of proposal_cov
  long accepted = 0;
  long proposed = 0;
  std::uint64_t seed = 0;
  Rng rng;

  void set_proposal(const Matrix& cov) {
    Eigen::LLT<Matrix> llt(cov);
    if (llt.info() != Eigen::Success) throw NumericalFailure("proposal covariance is not positive definite", -1);
    proposal_cov = cov;
    proposal_chol = llt.matrixL();
  }
  double acceptance_rate() const {
    return proposed > 0 ? static_cast<double>(accepted) / static_cast<double>(proposed) : 0.0;
  }
};

/// Metropolis acceptance probability min(1, exp(delta)).
inline double acceptance_probability(double delta) { return delta >= 0.0 ? 1.0 : std::exp(delta); }

/// One Gaussian random-walk proposal in z-space with the Metropolis
/// accept rule. Non-finite proposal densities are rejected.
template <typename LogDensity>
bool mh_step(ChainState& chain, const LogDensity& log_density) {
  Vector zs = chain.z + chain.proposal_chol * standard_normal_vector(chain.z.size(), chain.rng);
  const double lp = log_density(zs);
  ++chain.proposed;
  const double u = uniform01(chain.rng);
  if (!std::isfinite(lp)) return false;
  if (u < acceptance_probability(lp - chain.log_post)) {
    chain.z = std::move(zs);
    chain.log_post = lp;
    ++chain.accepted;
    return true;
  }
  return false;
}

/// Haario et al. adaptive proposal: s_d Cov(history) + s_d eps I,
/// s_d = 2.4^2 / d.
inline Matrix adapt_covariance(const Matrix& history, double epsilon = 1e-6) {
  if (history.rows() < 2) throw InputError("adaptation needs at least two draws");
  const double d = static_cast<double>(history.cols());
  const double sd = 2.4 * 2.4 / d;
  Matrix cov = linalg::sample_covariance(history);
  linalg::symmetrize(cov);
  Matrix out = sd * cov;
  out.diagonal().array() += sd * epsilon;
  return out;
}

// ---------------------------------------------------------------------------
// Blocked multi-chain protocol

struct SamplerConfig {
  int chains = 4;
  int block_size = 1000;
  double psrf_phase1 = 2.0;
  double psrf_target = 1.1;
  double ess_target = 1000.0;
  int max_blocks = 200;
  double epsilon = 1e-6;
  std::uint64_t seed = 1;
  int init_attempts = 100;
  int n_state_samples = 1000;
  bool parallel = true;

  void validate() const {
    if (chains < 2) throw InputError("mcmc.chains must be >= 2");
    if (block_size < 10) throw InputError("mcmc.block_size must be >= 10");
    if (!(psrf_phase1 > 1.0) || !(psrf_target > 1.0)) throw InputError("PSRF thresholds must be > 1");
    if (!(ess_target > 0.0)) throw InputError("mcmc.ess_target must be > 0");
    if (max_blocks < 1) throw InputError("mcmc.max_blocks must be >= 1");
    if (!(epsilon > 0.0)) throw InputError("mcmc.epsilon must be > 0");
    if (n_state_samples < 0) throw InputError("mcmc.n_state_samples must be >= 0");
  }
};

struct BlockRecord {
  int index = 0;  // 0-based block counter over the whole run
  int phase = 1;
  std::vector<double> psrf;  // latest block (phases 1-2) or all phase-3 draws
  std::vector<double> ess;   // phase 3 only, summed over chains
  std::vector<double> acceptance;  // per chain, this block
};

struct ChainRecord {
  std::uint64_t seed = 0;
  Matrix z;       // retained draws, one row per iteration
  Matrix draws;   // natural scale
  std::vector<double> log_post;
  std::vector<int> block_starts;  // row offsets of each retained block
  double acceptance = 0.0;        // over the retained draws
  Matrix proposal_cov;
  bool failed = false;
  std::string failure;
};

struct SampleStore {
  std::vector<std::string> names;
  std::vector<std::string> natural_names;
  std::vector<ChainRecord> chains;
  std::vector<BlockRecord> blocks;
  bool converged = false;
  int retained_phase = 3;
  std::vector<double> final_psrf;
  std::vector<double> final_ess;

  // thinned draws used for backward sampling
  std::vector<int> thinned_index;  // indices into pooled draws
  Matrix thinned_z;
  Matrix thinned_draws;
  std::vector<std::uint64_t> trajectory_seeds;
  std::vector<Matrix> trajectories;  // T x dim per thinned draw, when kept

  int dim() const { return static_cast<int>(names.size()); }

  std::vector<const ChainRecord*> active_chains() const {
    std::vector<const ChainRecord*> out;
    for (const auto& c : chains)
      if (!c.failed) out.push_back(&c);
    return out;
  }

  /// Retained draws of every surviving chain, stacked chain by chain.
  Matrix pooled(bool natural_scale = true) const {
    long n = 0;
    for (auto* c : active_chains()) n += c->z.rows();
    Matrix out(n, dim());
    long row = 0;
    for (auto* c : active_chains()) {
      const Matrix& m = natural_scale ? c->draws : c->z;
      out.middleRows(row, m.rows()) = m;
      row += m.rows();
    }
    return out;
  }

  std::vector<double> pooled_log_post() const {
    std::vector<double> out;
    for (auto* c : active_chains()) out.insert(out.end(), c->log_post.begin(), c->log_post.end());
    return out;
  }

  double mean_acceptance() const {
    double s = 0.0;
    int n = 0;
    for (auto* c : active_chains()) {
      s += c->acceptance;
      ++n;
    }
    return n ? s / n : 0.0;
  }
};

namespace detail {

inline std::vector<std::vector<double>> column_chains(const std::vector<Matrix>& per_chain, int col,
                                                      long from) {
  std::vector<std::vector<double>> out;
  for (const Matrix& m : per_chain) {
    std::vector<double> v(m.rows() - from);
    for (long i = from; i < m.rows(); ++i) v[i - from] = m(i, col);
    out.push_back(std::move(v));
  }
  return out;
}

inline double psrf_or_inf(const std::vector<std::vector<double>>& chains) {
  try {
    return gelman_rubin(chains);
  } catch (const DiagnosticUndefined&) {
    return std::numeric_limits<double>::infinity();
  }
}

inline double ess_or_zero(const std::vector<std::vector<double>>& chains) {
  try {
    return effective_sample_size(chains);
  } catch (const DiagnosticUndefined&) {
    return 0.0;
  }
}

/// Equally spaced indices into n pooled draws.
inline std::vector<int> equally_spaced(long n, int k) {
  std::vector<int> idx;
  if (n <= 0 || k <= 0) return idx;
  if (k >= n) {
    for (long i = 0; i < n; ++i) idx.push_back(static_cast<int>(i));
    return idx;
  }
  const long stride = n / k;
  const long offset = stride - 1;
  for (int j = 0; j < k; ++j) idx.push_back(static_cast<int>(offset + j * stride));
  return idx;
}

}  // namespace detail

/// Runs the three-phase protocol: fixed Sigma_0 until every PSRF < psrf_phase1,
/// per-chain Haario adaptation until every PSRF < psrf_target, then a fixed
/// proposal until every summed ESS > ess_target and PSRF < psrf_target over
/// the phase-3 draws. Only phase-3 draws are retained. If max_blocks runs
/// out first the store holds the current phase's draws and converged=false.
template <SamplingTarget Target>
SampleStore run_sampler(const Target& target, const Matrix& sigma0, const SamplerConfig& cfg,
                        std::vector<std::string> names = {}) {
  cfg.validate();
  const int d = target.dim();
  if (sigma0.rows() != d || sigma0.cols() != d) throw InputError("Sigma_0 has the wrong dimension");
  if (names.empty())
    for (int i = 0; i < d; ++i) names.push_back("z" + std::to_string(i));

  const int m = cfg.chains;
  std::vector<ChainState> state(m);
  std::vector<ChainRecord> record(m);
  std::vector<Matrix> phase_draws(m);  // draws of the current phase
  std::vector<std::vector<double>> phase_lp(m);
  std::vector<std::vector<int>> phase_starts(m);
  std::vector<Matrix> history(m);  // adaptation history since the end of phase 1

  auto log_density = [&target](const Vector& z) { return target.log_density(z); };

  for (int c = 0; c < m; ++c) {
    ChainState& s = state[c];
    s.seed = mix_seed(cfg.seed, static_cast<std::uint64_t>(c));
    s.rng.seed(s.seed);
    record[c].seed = s.seed;
    s.set_proposal(sigma0);
    for (int attempt = 0; attempt < cfg.init_attempts; ++attempt) {
      s.z = target.initial(s.rng);
      s.log_post = target.log_density(s.z);
      if (s.log_post > kNegInf) break;
    }
    if (!(s.log_post > kNegInf)) {
      record[c].failed = true;
      record[c].failure = "no initial value with finite log posterior";
    }
  }

  auto alive = [&] {
    std::vector<int> out;
    for (int c = 0; c < m; ++c)
      if (!record[c].failed) out.push_back(c);
    return out;
  };
  if (alive().size() < 2)
    throw NumericalFailure("fewer than two chains could be initialised", -1);

  auto run_block = [&](int c) {
    ChainState& s = state[c];
    try {
      const long a0 = s.accepted, p0 = s.proposed;
      Matrix block(cfg.block_size, d);
      std::vector<double> lp(cfg.block_size);
      for (int i = 0; i < cfg.block_size; ++i) {
        mh_step(s, log_density);
        block.row(i) = s.z.transpose();
        lp[i] = s.log_post;
      }
      const long old = phase_draws[c].rows();
      phase_starts[c].push_back(static_cast<int>(old));
      phase_draws[c].conservativeResize(old + cfg.block_size, d);
      phase_draws[c].bottomRows(cfg.block_size) = block;
      phase_lp[c].insert(phase_lp[c].end(), lp.begin(), lp.end());
      return static_cast<double>(s.accepted - a0) / static_cast<double>(s.proposed - p0);
    } catch (const std::exception& e) {
      record[c].failed = true;
      record[c].failure = e.what();
      return 0.0;
    }
  };

  auto reset_phase = [&] {
    for (int c = 0; c < m; ++c) {
      phase_draws[c].resize(0, d);
      phase_lp[c].clear();
      phase_starts[c].clear();
      state[c].accepted = state[c].proposed = 0;
    }
  };
  reset_phase();

  SampleStore store;
  store.names = names;
  store.natural_names = names;
  int phase = 1;
  bool done = false;
  for (int b = 0; b < cfg.max_blocks && !done; ++b) {
    std::vector<int> live = alive();
    std::vector<double> acc(m, 0.0);
    if (cfg.parallel && live.size() > 1) {
      std::vector<std::thread> pool;
      for (int c : live) pool.emplace_back([&, c] { acc[c] = run_block(c); });
      for (auto& t : pool) t.join();
    } else {
      for (int c : live) acc[c] = run_block(c);
    }
    live = alive();
    if (live.size() < 2) throw NumericalFailure("fewer than two chains remain", -1);

    BlockRecord rec;
    rec.index = b;
    rec.phase = phase;
    rec.acceptance = acc;
    std::vector<Matrix> live_draws;
    for (int c : live) live_draws.push_back(phase_draws[c]);
    const long from = phase == 3 ? 0 : live_draws[0].rows() - cfg.block_size;
    rec.psrf.resize(d);
    for (int j = 0; j < d; ++j) rec.psrf[j] = detail::psrf_or_inf(detail::column_chains(live_draws, j, from));
    const double max_psrf = *std::max_element(rec.psrf.begin(), rec.psrf.end());

    if (phase == 3) {
      rec.ess.resize(d);
      for (int j = 0; j < d; ++j) rec.ess[j] = detail::ess_or_zero(detail::column_chains(live_draws, j, 0));
      const double min_ess = *std::min_element(rec.ess.begin(), rec.ess.end());
      store.final_ess = rec.ess;
      if (min_ess > cfg.ess_target && max_psrf < cfg.psrf_target) done = true;
    } else if (phase == 2) {
      for (int c : live) {
        const Matrix& latest = phase_draws[c].bottomRows(cfg.block_size);
        const long old = history[c].rows();
        history[c].conservativeResize(old + latest.rows(), d);
        history[c].bottomRows(latest.rows()) = latest;
        state[c].set_proposal(adapt_covariance(history[c], cfg.epsilon));
      }
      if (max_psrf < cfg.psrf_target) {
        phase = 3;
        reset_phase();
      }
    } else if (max_psrf < cfg.psrf_phase1) {
      // The block that ends phase 1 seeds the adaptation history.
      for (int c : live) {
        history[c] = phase_draws[c].bottomRows(cfg.block_size);
        state[c].set_proposal(adapt_covariance(history[c], cfg.epsilon));
      }
      phase = 2;
      reset_phase();
    }
    store.final_psrf = rec.psrf;
    store.blocks.push_back(std::move(rec));
  }

  store.converged = done;
  store.retained_phase = phase;
  for (int c = 0; c < m; ++c) {
    ChainRecord& r = record[c];
    r.z = phase_draws[c];
    r.draws = r.z;
    r.log_post = phase_lp[c];
    r.block_starts = phase_starts[c];
    r.acceptance = state[c].acceptance_rate();
    r.proposal_cov = state[c].proposal_cov;
  }
  store.chains = std::move(record);
  return store;
}

/// Fills the thinned subset of equally spaced pooled draws.
inline void thin_store(SampleStore& store, int n_samples, std::uint64_t seed) {
  const Matrix z = store.pooled(false), x = store.pooled(true);
  store.thinned_index = detail::equally_spaced(z.rows(), n_samples);
  const int k = static_cast<int>(store.thinned_index.size());
  store.thinned_z.resize(k, store.dim());
  store.thinned_draws.resize(k, store.dim());
  store.trajectory_seeds.resize(k);
  for (int j = 0; j < k; ++j) {
    store.thinned_z.row(j) = z.row(store.thinned_index[j]);
    store.thinned_draws.row(j) = x.row(store.thinned_index[j]);
    store.trajectory_seeds[j] = mix_seed(seed, 1000003ULL + static_cast<std::uint64_t>(j));
  }
}

/// One backward-sampled state trajectory theta_{1:T} (T x dim) for the
/// given hyper-parameters.
inline Matrix sample_state_trajectory(const Series& y, const ModelSpec& spec, const StatePrior& prior,
                                      const HyperParams& phi, std::uint64_t seed) {
  FilterResult fr = forward_filter(y, phi, spec, prior, FilterStorage::Full);
  Rng rng(seed);
  return backward_sample(fr, phi, spec, rng);
}

struct FitOptions {
  SamplerConfig sampler;
  bool keep_trajectories = true;
};

/// Posterior sampling of the hyper-parameters followed by backward sampling
/// of theta_{1:T} for the thinned draws.
inline SampleStore fit_model(const ModelPosterior& post, const FitOptions& opt) {
  const ParameterSet& ps = post.parameters();
  SampleStore store = run_sampler(post, ps.proposal_covariance(), opt.sampler, ps.names());
  store.natural_names = ps.natural_names();
  for (ChainRecord& c : store.chains)
    for (long i = 0; i < c.z.rows(); ++i) c.draws.row(i) = ps.natural_vector(c.z.row(i).transpose()).transpose();
  thin_store(store, opt.sampler.n_state_samples, opt.sampler.seed);
  if (opt.keep_trajectories) {
    const int k = static_cast<int>(store.thinned_index.size());
    store.trajectories.resize(k);
    for (int j = 0; j < k; ++j)
      store.trajectories[j] = sample_state_trajectory(post.data(), post.spec(), post.state_prior(),
                                                      post.natural(store.thinned_z.row(j).transpose()),
                                                      store.trajectory_seeds[j]);
  }
  return store;
}

}  // namespace icts

#endif  // ICTS_MCMC_HPP
