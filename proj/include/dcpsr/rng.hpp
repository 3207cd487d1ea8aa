#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace dcpsr {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Independent stream keyed by (seed, generation, slot). Scheduling order
/// can never change which numbers an individual sees.
inline std::mt19937_64 stream_rng(std::uint64_t seed, std::uint64_t generation,
                                  std::uint64_t slot) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ generation);
  h = splitmix64(h ^ slot);
  return std::mt19937_64(h);
}

/// Uniform double in [0, 1) built directly from the top 53 bits, so the
/// value sequence is identical on every platform.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform_real(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

/// Uniform integer in [lo, hi], both inclusive.
inline int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  const double u = uniform01(rng);
  return lo + static_cast<int>(u * static_cast<double>(hi - lo + 1));
}

/// Standard normal via Box-Muller (platform-independent sequence).
inline double standard_normal(std::mt19937_64& rng) {
  const double u1 = (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

}  // namespace dcpsr
