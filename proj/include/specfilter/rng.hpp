#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

namespace specfilter {

// All randomized code in the library draws through these helpers instead of
// <random> distributions, whose output is implementation-defined. Generated
// datasets, splits and initializations therefore reproduce bit-for-bit on any
// standard library.
using Rng = std::mt19937_64;

// Uniform in [0, 1).
inline double uniform01(Rng& g) { return (g() >> 11) * 0x1.0p-53; }

// Uniform in [-w, w).
inline double uniform_sym(Rng& g, double w) { return (2.0 * uniform01(g) - 1.0) * w; }

// Standard normal via Box-Muller, one deviate per call (two draws consumed).
inline double normal01(Rng& g) {
  double u1 = ((g() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
  double u2 = uniform01(g);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

// Uniform index in [0, n). Modulo bias is below 2^-40 for any n this library
// ever passes in.
inline std::size_t uniform_index(Rng& g, std::size_t n) { return g() % n; }

// Fisher-Yates; std::shuffle is not reproducible across implementations.
template <typename T>
void shuffle(std::vector<T>& v, Rng& g) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[uniform_index(g, i)]);
  }
}

}  // namespace specfilter
