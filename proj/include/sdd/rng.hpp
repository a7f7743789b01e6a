#pragma once

#include <cmath>
#include <cstdint>
#include <random>

// Seeded sampling built on std::mt19937_64. The engine's output sequence is
// fixed by the C++ standard; the distribution transforms below are our own,
// so identical seeds produce identical draws on every platform.
namespace sdd::rng {

using Engine = std::mt19937_64;

// Uniform in (0, 1]; never returns 0 so log(u) is safe.
inline double uniform01(Engine& eng) {
  return static_cast<double>((eng() >> 11) + 1) * 0x1.0p-53;
}

inline double uniform(Engine& eng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(eng);
}

// Uniform integer in [0, n).
inline std::uint64_t uniform_index(Engine& eng, std::uint64_t n) {
  // Rejection against the largest multiple of n to avoid modulo bias.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do {
    x = eng();
  } while (x >= limit);
  return x % n;
}

// Box-Muller, one value per call.
inline double normal(Engine& eng, double mean, double stddev) {
  const double u1 = uniform01(eng);
  const double u2 = uniform01(eng);
  const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  return mean + stddev * z;
}

// Inversion by sequential search; large means are split using the additivity
// of the Poisson distribution so exp(-lambda) stays representable.
inline int poisson(Engine& eng, double lambda) {
  if (lambda <= 0.0) return 0;
  if (lambda > 500.0) {
    const int a = poisson(eng, lambda / 2.0);
    return a + poisson(eng, lambda - lambda / 2.0);
  }
  const double u = uniform01(eng);
  double p = std::exp(-lambda);
  double cdf = p;
  int k = 0;
  const int cap = static_cast<int>(lambda + 40.0 * std::sqrt(lambda) + 50.0);
  while (u > cdf && k < cap) {
    ++k;
    p *= lambda / k;
    cdf += p;
  }
  return k;
}

}  // namespace sdd::rng
