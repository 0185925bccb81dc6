#pragma once

#include "gwdr/types.hpp"

#include <cmath>
#include <cstdint>
#include <random>

namespace gwdr {

/// Deterministic RNG. Variate generation is done by hand (not via
/// std::*_distribution) so that a given seed produces the same stream on any
/// standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform double in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box-Muller.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    // u1 in (0, 1] so the log is finite
    const double u1 = (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  std::uint64_t next_u64() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

/// Stable seed derivation for independent streams (splitmix64 step).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Random plan with rows rescaled to the marginal h.
inline Matrix random_plan_values(const Vector& h, Eigen::Index n, Rng& rng) {
  Matrix T(h.size(), n);
  for (Eigen::Index i = 0; i < T.rows(); ++i) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      T(i, j) = rng.uniform();
      s += T(i, j);
    }
    if (s <= 0.0) {
      T.row(i).setConstant(1.0 / static_cast<double>(n));
      s = 1.0;
    }
    T.row(i) *= h(i) / s;
  }
  return T;
}

}  // namespace gwdr
