#ifndef ICTS_RANDOM_HPP
#define ICTS_RANDOM_HPP

#include <cmath>
#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace icts {

using Rng = std::mt19937_64;

/// splitmix64 finaliser; used to derive independent streams from one seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline double standard_normal(Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  return n(rng);
}

inline double uniform01(Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return u(rng);
}

inline Eigen::VectorXd standard_normal_vector(Eigen::Index n, Rng& rng) {
  Eigen::VectorXd z(n);
  for (Eigen::Index i = 0; i < n; ++i) z[i] = standard_normal(rng);
  return z;
}

}  // namespace icts

#endif  // ICTS_RANDOM_HPP
