#include "doctest.h"

#include <cmath>
#include <vector>

#include "mms/random.hpp"

using namespace mms;

TEST_CASE("identical seeds reproduce the sample stream exactly") {
  GaussianSampler a(42);
  GaussianSampler b(42);
  for (int i = 0; i < 1000; ++i) {
    CHECK(a.sample() == b.sample());
  }
  GaussianSampler c(42);
  GaussianSampler d(43);
  int diff = 0;
  for (int i = 0; i < 100; ++i) {
    if (c.sample() != d.sample()) ++diff;
  }
  CHECK(diff > 90);
}

TEST_CASE("derived stream seeds decorrelate streams sharing a base seed") {
  // Same base, different streams: entirely different outputs.
  CHECK(derive_seed(7, 0) != derive_seed(7, 1));
  CHECK(derive_seed(7, 0) != derive_seed(8, 0));
  // Deterministic function.
  CHECK(derive_seed(1234567, 9) == derive_seed(1234567, 9));

  GaussianSampler s0(derive_seed(7, 0));
  GaussianSampler s1(derive_seed(7, 1));
  double corr = 0.0;
  const int n = 4000;
  for (int i = 0; i < n; ++i) corr += s0.sample() * s1.sample();
  corr /= n;
  // Empirical cross-moment of independent unit normals: sd ~ 1/sqrt(n).
  CHECK(std::abs(corr) < 5.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("gaussian samples carry unit-normal moments") {
  GaussianSampler rng(301);
  const int n = 200000;
  double sum = 0.0, sum2 = 0.0, sum3 = 0.0, sum4 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.sample();
    sum += x;
    sum2 += x * x;
    sum3 += x * x * x;
    sum4 += x * x * x * x;
  }
  const double mean = sum / n;
  const double var = sum2 / n - mean * mean;
  // Bounds are ~5 standard errors of each empirical moment at this n, and
  // the fixed seed makes the draw (and hence the test) deterministic.
  CHECK(std::abs(mean) < 0.012);
  CHECK(std::abs(var - 1.0) < 0.02);
  CHECK(std::abs(sum3 / n) < 0.05);
  CHECK(std::abs(sum4 / n - 3.0) < 0.15);
}

TEST_CASE("uniform01 stays inside the half-open unit interval") {
  GaussianSampler rng(302);
  double lo = 1.0, hi = 0.0, sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform01();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    lo = std::min(lo, u);
    hi = std::max(hi, u);
    sum += u;
  }
  CHECK(lo < 0.001);
  CHECK(hi > 0.999);
  CHECK(std::abs(sum / n - 0.5) < 0.005);
}

TEST_CASE("uniform indices cover their range and nothing else") {
  GaussianSampler rng(303);
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 7000; ++i) {
    const std::uint64_t k = rng.uniform_index(7);
    REQUIRE(k < 7);
    counts[static_cast<int>(k)]++;
  }
  for (int c : counts) {
    CHECK(c > 800);
    CHECK(c < 1200);
  }
}

TEST_CASE("vector samples consume the scalar stream in order") {
  GaussianSampler a(304);
  GaussianSampler b(304);
  const Vec3 v = a.sample_vec3();
  CHECK(v.x() == b.sample());
  CHECK(v.y() == b.sample());
  CHECK(v.z() == b.sample());
}
