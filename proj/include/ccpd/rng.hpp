#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "ccpd/types.hpp"

namespace ccpd {

using Rng = std::mt19937_64;

// SplitMix64 finalizer; derives independent child seeds from a parent seed.
inline std::uint64_t split_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Circular complex Gaussian draw with E|z|^2 = variance.
inline cd complex_gaussian(Rng& rng, double variance = 1.0) {
  std::normal_distribution<double> n(0.0, std::sqrt(variance / 2.0));
  const double re = n(rng);
  const double im = n(rng);
  return {re, im};
}

}  // namespace ccpd
