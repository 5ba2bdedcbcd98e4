// lidarperf - performance testing toolkit for LiDAR perception pipelines
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace lidarperf {

// Seed derivation and variate generation are written out explicitly (instead
// of std::*_distribution) so that a given seed produces the same stream on
// every platform and standard library.

/// FNV-1a over bytes, used to fold strings into seed material.
inline std::uint64_t fnv1a64(std::string_view s,
                             std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// splitmix64 finalizer; decorrelates nearby seed values.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Derives an independent sub-stream seed from a master seed, a stage tag and
/// up to two numeric ids (e.g. frame index). Stable across runs and platforms,
/// so per-frame streams do not depend on processing order.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view tag,
                                 std::string_view id = {},
                                 std::uint64_t a = 0, std::uint64_t b = 0) {
  std::uint64_t h = fnv1a64(tag);
  h = fnv1a64(id, h);
  h = mix64(h ^ mix64(master));
  h = mix64(h ^ mix64(a + 0x9e3779b97f4a7c15ULL));
  h = mix64(h ^ mix64(b + 0x7f4a7c159e3779b9ULL));
  return h;
}

/// Deterministic random stream with explicit inverse-CDF / Box-Muller
/// transforms on top of mt19937_64.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53-bit resolution.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    // modulo bias is < 2^-53 for the n used here (point counts, indices)
    return static_cast<std::uint64_t>(uniform01() * static_cast<double>(n));
  }

  /// Exponential with the given rate (mean 1/rate).
  double exponential(double rate) {
    return -std::log1p(-uniform01()) / rate;
  }

  /// Standard normal via Box-Muller; no cached spare so the draw count per
  /// call is fixed.
  double normal01() {
    double u1 = uniform01();
    double u2 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.141592653589793238462643383279502884 * u2);
  }

  double normal(double mean, double sigma) { return mean + sigma * normal01(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace lidarperf
