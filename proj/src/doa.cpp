#include "ccpd/doa.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace ccpd {

GeneratorEstimate estimate_generator(std::span<const cd> a_sub, int pitch) {
  if (a_sub.size() < 2) throw std::invalid_argument("estimate_generator: need at least two entries");
  if (pitch < 1) throw std::invalid_argument("estimate_generator: pitch must be positive");
  cd cross{0.0, 0.0};
  double lead = 0.0;
  for (std::size_t l = 0; l + 1 < a_sub.size(); ++l) {
    cross += std::conj(a_sub[l]) * a_sub[l + 1];
    lead += std::norm(a_sub[l]);
  }
  if (!(lead > 0.0)) throw std::invalid_argument("estimate_generator: zero leading block");
  const cd z = cross / lead;
  const double mag = std::abs(z);
  GeneratorEstimate g;
  g.z = mag > 0.0 ? z / mag : cd{1.0, 0.0};
  g.pitch = pitch;
  g.weight = static_cast<double>(a_sub.size() - 1);
  return g;
}

GeneratorEstimate estimate_generator(const CVector& a_sub, int pitch) {
  return estimate_generator(std::span<const cd>(a_sub.data(), static_cast<std::size_t>(a_sub.size())), pitch);
}

namespace {

// Cosines u with exp(i pi pitch u) = z, within [-1 - margin, 1 + margin].
std::vector<double> cosine_candidates(const GeneratorEstimate& g, double margin) {
  const double psi = std::arg(g.z);
  const double lo = -1.0 - margin, hi = 1.0 + margin;
  const double scale = kPi * g.pitch;
  std::vector<double> out;
  const auto kmin = static_cast<long>(std::floor((lo * scale - psi) / (2.0 * kPi)));
  const auto kmax = static_cast<long>(std::ceil((hi * scale - psi) / (2.0 * kPi)));
  for (long k = kmin; k <= kmax; ++k) {
    const double u = (psi + 2.0 * kPi * static_cast<double>(k)) / scale;
    if (u >= lo && u <= hi) out.push_back(u);
  }
  return out;
}

}  // namespace

CoprimeResolution resolve_coprime(const GeneratorEstimate& ga, const GeneratorEstimate& gb) {
  if (ga.pitch < 1 || gb.pitch < 1 || std::gcd(ga.pitch, gb.pitch) != 1) {
    throw std::invalid_argument("resolve_coprime: pitches must be coprime");
  }
  const double spacing = 2.0 / (static_cast<double>(ga.pitch) * gb.pitch);
  const double margin = spacing / 2.0;
  const auto ca = cosine_candidates(ga, margin);
  const auto cb = cosine_candidates(gb, margin);

  const double wa = ga.weight > 0 ? ga.weight : 1.0;
  const double wb = gb.weight > 0 ? gb.weight : 1.0;
  const auto outside = [](double u) { return std::max(0.0, std::abs(u) - 1.0); };

  double best_mismatch = std::numeric_limits<double>::infinity();
  for (double ua : ca)
    for (double ub : cb) best_mismatch = std::min(best_mismatch, std::abs(ua - ub));

  // Pairs u and u - 2 alias near the boundary; prefer the in-range one.
  CoprimeResolution best;
  double best_outside = std::numeric_limits<double>::infinity();
  for (double ua : ca) {
    for (double ub : cb) {
      const double mismatch = std::abs(ua - ub);
      if (mismatch > best_mismatch + 1e-9) continue;
      const double u = (wa * ua + wb * ub) / (wa + wb);
      if (outside(u) < best_outside) {
        best_outside = outside(u);
        best.u = u;
        best.mismatch = mismatch;
      }
    }
  }
  best.u = std::clamp(best.u, -1.0, 1.0);
  best.flagged = best.mismatch > spacing;
  return best;
}

namespace {

CVector gather(const CMatrix& a, Eigen::Index col, const std::vector<std::size_t>& idx) {
  CVector out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t p = 0; p < idx.size(); ++p) out[static_cast<Eigen::Index>(p)] = a(static_cast<Eigen::Index>(idx[p]), col);
  return out;
}

CoprimeResolution axis_cosine(const CMatrix& a, Eigen::Index col, const std::vector<std::size_t>& idx1,
                              int pitch1, const std::vector<std::size_t>& idx2, int pitch2) {
  const bool has1 = idx1.size() >= 2, has2 = idx2.size() >= 2;
  if (has1 && has2) {
    return resolve_coprime(estimate_generator(gather(a, col, idx1), pitch1),
                           estimate_generator(gather(a, col, idx2), pitch2));
  }
  // A lone subarray is unambiguous only with unit pitch.
  if (has1 && pitch1 == 1) return {std::arg(estimate_generator(gather(a, col, idx1), 1).z) / kPi, 0.0, false};
  if (has2 && pitch2 == 1) return {std::arg(estimate_generator(gather(a, col, idx2), 1).z) / kPi, 0.0, false};
  throw std::invalid_argument("doas_from_factors: axis cannot determine its direction cosine");
}

}  // namespace

std::vector<DoaEstimate> doas_from_factors(const CMatrix& a_hat, const ReceiveArrayLayout& layout,
                                           std::size_t array_index) {
  if (static_cast<std::size_t>(a_hat.rows()) != layout.size()) {
    throw std::invalid_argument("doas_from_factors: row count must equal element count");
  }
  const IndexSets& q = layout.index_sets;
  std::vector<DoaEstimate> out;
  out.reserve(static_cast<std::size_t>(a_hat.cols()));
  for (Eigen::Index r = 0; r < a_hat.cols(); ++r) {
    const auto ux = axis_cosine(a_hat, r, q.x1, layout.axis_x.pitch_a, q.x2, layout.axis_x.pitch_b);
    const auto wy = axis_cosine(a_hat, r, q.y1, layout.axis_y.pitch_a, q.y2, layout.axis_y.pitch_b);
    double u = ux.u, w = wy.u;
    bool flagged = ux.flagged || wy.flagged;
    const double planar = u * u + w * w;
    if (planar > 1.0) {
      if (planar > 1.0 + 1e-6) flagged = true;
      const double s = 1.0 / std::sqrt(planar);
      u *= s;
      w *= s;
    }
    const double up = std::sqrt(std::max(0.0, 1.0 - u * u - w * w));
    out.push_back(DoaEstimate{Direction::normalized(Vec3(u, w, up)), u, w, array_index,
                              static_cast<std::size_t>(r), flagged});
  }
  return out;
}

}  // namespace ccpd
