#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace vqgap {

// Uniform/exponential draws built directly on the mt19937_64 bit stream.
// std::uniform_real_distribution et al. are not pinned by the standard, so
// sequences would differ across standard libraries; these transforms keep
// seeded runs reproducible everywhere.

/// Uniform double in [0, 1) with 53-bit resolution.
inline double uniform_unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1p-53;
}

/// Uniform double in the open interval (0, 1); never returns 0 or 1.
inline double uniform_open(std::mt19937_64& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1p-53;
}

inline double uniform_range(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform_unit(rng);
}

/// Integer in [0, n).
inline std::uint64_t uniform_index(std::mt19937_64& rng, std::uint64_t n) {
  return static_cast<std::uint64_t>(uniform_unit(rng) * static_cast<double>(n)) % n;
}

/// Unit-mean exponential (Rayleigh power fading); strictly positive.
inline double exponential_unit_mean(std::mt19937_64& rng) {
  return -std::log(uniform_open(rng));
}

/// splitmix64 finalizer; combines seeds into independent streams.
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace vqgap
