#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace airgraph::rng {

// Counter-based generator: every draw is a pure function of (seed, index),
// so results do not depend on traversal order and parallel execution gives
// the same streams as serial.

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Derives an independent stream key; mix(seed, a) != mix(a, seed) in
/// general, callers must keep argument order fixed.
inline std::uint64_t mix(std::uint64_t seed, std::uint64_t key) {
  return splitmix64(seed ^ splitmix64(key));
}

/// Uniform in [0, 1) with 53 bits of mantissa.
inline double uniform01(std::uint64_t seed, std::uint64_t index) {
  return static_cast<double>(mix(seed, index) >> 11) * 0x1.0p-53;
}

/// Standard normal via Box-Muller; consumes two counter slots per index.
inline double standard_normal(std::uint64_t seed, std::uint64_t index) {
  const double u1 =
      static_cast<double>((mix(seed, 2 * index) >> 11) + 1) * 0x1.0p-53;
  const double u2 =
      static_cast<double>(mix(seed, 2 * index + 1) >> 11) * 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

// Fixed stream tags so independent consumers of one user seed never share
// counter slots.
inline constexpr std::uint64_t kStreamWeights = 0x57454947ull;   // CF weights
inline constexpr std::uint64_t kStreamPolyRhs = 0x504f4c59ull;   // poly rhs
inline constexpr std::uint64_t kStreamMesh = 0x4d455348ull;      // mesh jitter
inline constexpr std::uint64_t kStreamTrials = 0x5452494cull;    // residual trials

}  // namespace airgraph::rng
