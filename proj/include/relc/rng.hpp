// Copyright (c) 2026 relcomplete authors
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace relc {

using Rng = std::mt19937_64;

/// Mixes a sequence of 64-bit words into one seed (splitmix64 finalizer per word).
/// Used to derive independent per-step / per-item streams from a base seed.
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b = 0x9e3779b97f4a7c15ULL,
                              std::uint64_t c = 0) {
  std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1) + 0xbf58476d1ce4e5b9ULL * (c + 1);
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ULL;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return z;
}

/// Uniform double in [0, 1) from the top 53 bits of the engine output.
/// Stateless mapping: the drawn value depends only on the engine stream.
inline double uniform01(Rng& g) { return static_cast<double>(g() >> 11) * 0x1.0p-53; }

/// Uniform double in [lo, hi).
inline double uniform(Rng& g, double lo, double hi) { return lo + (hi - lo) * uniform01(g); }

/// Uniform integer in [0, n). Modulo bias is negligible for 64-bit range.
inline int uniform_index(Rng& g, int n) { return static_cast<int>(g() % static_cast<std::uint64_t>(n)); }

/// Standard normal via Box-Muller. Draws two words per call; keeps no spare state
/// so the stream position is a pure function of call count.
inline double gaussian(Rng& g) {
  double u1 = uniform01(g);
  double u2 = uniform01(g);
  if (u1 < 1e-300) u1 = 1e-300;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
}

}  // namespace relc
