#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ccpd/geometry.hpp"
#include "ccpd/types.hpp"

namespace ccpd {

struct GeneratorEstimate {
  cd z{1.0, 0.0};     // unit modulus
  int pitch = 1;
  double weight = 0;  // subarray length minus one
};

/// Shift-correlation estimate of a single Vandermonde generator,
/// z = <a(0:L-2), a(1:L-1)> / <a(0:L-2), a(0:L-2)>, projected to the unit
/// circle. Invariant to global complex scaling of `a_sub`.
GeneratorEstimate estimate_generator(std::span<const cd> a_sub, int pitch);
GeneratorEstimate estimate_generator(const CVector& a_sub, int pitch);

struct CoprimeResolution {
  double u = 0.0;         // resolved direction cosine in [-1, 1]
  double mismatch = 0.0;  // |u_a - u_b| of the selected candidate pair
  bool flagged = false;   // mismatch above 2 / (pitch_a * pitch_b)
};

/// Resolves the phase-wrapping ambiguity of two generators with coprime
/// pitches: enumerates each generator's candidate cosines in [-1, 1], picks
/// the closest pair and returns its weight-averaged cosine.
CoprimeResolution resolve_coprime(const GeneratorEstimate& ga, const GeneratorEstimate& gb);

struct DoaEstimate {
  Direction direction;
  double u = 0.0;
  double w = 0.0;
  std::size_t array_index = 0;
  std::size_t target_index = 0;
  bool flagged = false;  // ambiguity mismatch or invalid cosines
};

/// One DOA per column of the recovered steering matrix. Targets are taken to
/// lie in the +z half-space of the array.
std::vector<DoaEstimate> doas_from_factors(const CMatrix& a_hat, const ReceiveArrayLayout& layout,
                                           std::size_t array_index = 0);

}  // namespace ccpd
