#include "ccpd/scene.hpp"

#include <cmath>
#include <iostream>
#include <stdexcept>
#include <string>

namespace ccpd {

void SceneConfig::validate() const {
  if (!((target_box.hi.array() > target_box.lo.array()).all())) {
    throw std::invalid_argument("scene: target box must be nondegenerate");
  }
  if (num_targets < 1 || pulses < 1 || samples_per_pulse < 1) {
    throw std::invalid_argument("scene: targets, pulses and samples must be >= 1");
  }
}

namespace {

double angle_between(const Vec3& a, const Vec3& b) {
  // atan2 form stays accurate for nearly parallel vectors.
  return std::atan2(a.cross(b).norm(), a.dot(b));
}

bool separated(const Vec3& candidate, std::span<const Vec3> accepted,
               std::span<const Vec3> anchors) {
  for (const Vec3& anchor : anchors) {
    const Vec3 dc = candidate - anchor;
    if (dc.norm() == 0.0) return false;
    for (const Vec3& other : accepted) {
      if (angle_between(dc, other - anchor) < kMinTargetSeparationRad) return false;
    }
  }
  return true;
}

}  // namespace

std::vector<Vec3> sample_targets(const Box& box, std::size_t count, Rng& rng,
                                 std::span<const Vec3> anchors) {
  if (count < 1) throw std::invalid_argument("sample_targets: need at least one target");
  if (!((box.hi.array() >= box.lo.array()).all())) {
    throw std::invalid_argument("sample_targets: box lo exceeds hi");
  }
  std::vector<std::uniform_real_distribution<double>> axes;
  for (int d = 0; d < 3; ++d) axes.emplace_back(box.lo[d], box.hi[d]);

  std::vector<Vec3> out;
  out.reserve(count);
  while (out.size() < count) {
    bool placed = false;
    for (int attempt = 0; attempt <= kTargetRetries && !placed; ++attempt) {
      Vec3 p;
      for (int d = 0; d < 3; ++d) p[d] = axes[static_cast<std::size_t>(d)](rng);
      if (separated(p, out, anchors)) {
        out.push_back(p);
        placed = true;
      }
    }
    if (!placed) {
      throw std::runtime_error("sample_targets: could not separate target " +
                               std::to_string(out.size()) + " after " +
                               std::to_string(kTargetRetries) + " retries");
    }
  }
  return out;
}

std::vector<CMatrix> sample_rcs(std::size_t targets, std::size_t pulses, std::size_t arrays,
                                Rng& rng) {
  std::vector<CMatrix> out;
  out.reserve(arrays);
  for (std::size_t m = 0; m < arrays; ++m) {
    CMatrix c(static_cast<Eigen::Index>(pulses), static_cast<Eigen::Index>(targets));
    for (Eigen::Index r = 0; r < c.cols(); ++r)
      for (Eigen::Index k = 0; k < c.rows(); ++k) c(k, r) = complex_gaussian(rng);
    out.push_back(std::move(c));
  }
  return out;
}

CMatrix sample_waveforms(std::size_t samples, std::size_t transmitters, Rng& rng) {
  if (samples < transmitters) {
    std::cerr << "warning: T=" << samples << " < J=" << transmitters
              << "; waveform matrix cannot have full column rank\n";
  }
  CMatrix s(static_cast<Eigen::Index>(samples), static_cast<Eigen::Index>(transmitters));
  for (Eigen::Index j = 0; j < s.cols(); ++j)
    for (Eigen::Index t = 0; t < s.rows(); ++t) s(t, j) = complex_gaussian(rng);
  return s;
}

ObservationSet simulate(const RadarScene& scene, const CMatrix& waveforms,
                        std::span<const CMatrix> rcs) {
  const auto r = static_cast<Eigen::Index>(scene.targets.size());
  const std::size_t arrays = scene.receives.size();
  if (arrays < 1) throw std::invalid_argument("simulate: no receive arrays");
  if (rcs.size() != arrays) throw std::invalid_argument("simulate: need one RCS matrix per array");
  if (static_cast<std::size_t>(waveforms.cols()) != scene.transmit.size()) {
    throw std::invalid_argument("simulate: waveform columns must equal transmit elements");
  }

  CMatrix tx(static_cast<Eigen::Index>(scene.transmit.size()), r);
  for (Eigen::Index t = 0; t < r; ++t) {
    const auto& target = scene.targets[static_cast<std::size_t>(t)];
    tx.col(t) = steering_vector(scene.transmit, direction_between(scene.transmit.center, target));
  }

  CcpdFactors truth;
  truth.B = waveforms * tx;
  ObservationSet obs;
  obs.tensors.reserve(arrays);
  for (std::size_t m = 0; m < arrays; ++m) {
    const ReceiveArrayLayout& layout = scene.receives[m];
    if (rcs[m].cols() != r) throw std::invalid_argument("simulate: RCS columns must equal R");
    CMatrix a(static_cast<Eigen::Index>(layout.size()), r);
    for (Eigen::Index t = 0; t < r; ++t) {
      const auto& target = scene.targets[static_cast<std::size_t>(t)];
      a.col(t) = steering_vector(layout, direction_between(layout.center, target));
    }
    obs.tensors.push_back(cpd_eval(a, truth.B, rcs[m]));
    truth.A.push_back(std::move(a));
    truth.C.push_back(rcs[m]);
  }
  obs.noiseless = obs.tensors;
  obs.truth = std::move(truth);
  return obs;
}

ObservationSet add_noise(const ObservationSet& obs, double snr_db, Rng& rng) {
  if (!obs.noiseless) throw std::invalid_argument("add_noise: observation has no noiseless copy");
  ObservationSet out = obs;
  out.tensors = *obs.noiseless;
  if (std::isinf(snr_db) && snr_db > 0) return out;

  double power = 0.0;
  std::size_t entries = 0;
  for (const Tensor3& t : out.tensors) {
    for (const cd& x : t.data()) power += std::norm(x);
    entries += t.size();
  }
  if (entries == 0) return out;
  const double variance = power / static_cast<double>(entries) * std::pow(10.0, -snr_db / 10.0);
  for (Tensor3& t : out.tensors) {
    for (cd& x : t.data()) x += complex_gaussian(rng, variance);
  }
  return out;
}

}  // namespace ccpd
