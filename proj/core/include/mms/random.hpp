#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "mms/geometry.hpp"

namespace mms {

/// Derives an independent stream seed from a run seed (SplitMix64 finalizer).
/// Each sensor model gets its own stream so adding or removing one sensor
/// never shifts the noise another sensor sees.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Deterministic standard-normal sampler. std::normal_distribution's
/// algorithm is implementation-defined, so identical seeds could produce
/// different logs on different standard libraries; Box-Muller over the
/// engine's fixed bit stream pins the output everywhere.
class GaussianSampler {
 public:
  explicit GaussianSampler(std::uint64_t seed) : rng_(seed) {}

  double sample() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1;
    do {
      u1 = uniform01();
    } while (u1 <= 0.0);
    double u2 = uniform01();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  Vec3 sample_vec3() {
    double a = sample(), b = sample(), c = sample();
    return Vec3(a, b, c);
  }

  /// Uniform in [0, 1) with full 53-bit resolution.
  double uniform01() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n); n must be positive. Rejection-free modulo is
  /// fine here — n is tiny next to 2^64 so the bias is far below noise.
  std::uint64_t uniform_index(std::uint64_t n) { return rng_() % n; }

 private:
  std::mt19937_64 rng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace mms
