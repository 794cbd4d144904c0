#pragma once

#include "swvi/types.hpp"

#include <cstdint>
#include <random>

namespace swvi {

using Rng = std::mt19937_64;

/// Deterministic child seed for stream `stream` of a run seeded with `base`.
/// Independent samples (inversions, chains, starts) each take their own
/// stream so results do not depend on execution order.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline Vector standard_normal(Rng& rng, Index n) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = normal(rng);
  return v;
}

inline Matrix standard_normal(Rng& rng, Index rows, Index cols) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix a(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) a(i, j) = normal(rng);
  return a;
}

inline Matrix uniform_unit(Rng& rng, Index rows, Index cols) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Matrix a(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) a(i, j) = unif(rng);
  return a;
}

}  // namespace swvi
