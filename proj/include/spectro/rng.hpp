#pragma once

#include <cmath>
#include <cstdint>

// Counter-based deterministic RNG: splitmix64 evaluated at (seed, index).
// Stateless by construction, so any sample of a stream can be generated
// independently and the stream is bit-reproducible across platforms.
namespace spectro::rng {

inline std::uint64_t splitmix64_at(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + (index + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// uniform in (0,1), never exactly 0 or 1 (safe for log())
inline double uniform01(std::uint64_t seed, std::uint64_t index) {
  return (static_cast<double>(splitmix64_at(seed, index) >> 11) + 0.5) *
         (1.0 / 9007199254740992.0);  // 2^53
}

// standard normal via Box-Muller on two counter draws
inline double gauss(std::uint64_t seed, std::uint64_t index) {
  const double u1 = uniform01(seed, 2 * index);
  const double u2 = uniform01(seed, 2 * index + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

}  // namespace spectro::rng
