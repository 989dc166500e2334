#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "ccpd/geometry.hpp"
#include "ccpd/rng.hpp"
#include "ccpd/tensor.hpp"

namespace ccpd {

/// Axis-aligned box in wavelength units; lo <= hi componentwise.
struct Box {
  Vec3 lo = Vec3::Zero();
  Vec3 hi = Vec3::Zero();

  bool contains(const Vec3& p) const {
    return (p.array() >= lo.array()).all() && (p.array() <= hi.array()).all();
  }
};

struct SceneConfig {
  Box target_box;
  std::size_t num_targets = 1;
  std::size_t pulses = 1;
  std::size_t samples_per_pulse = 1;
  std::uint64_t seed = 0;

  void validate() const;
};

struct RadarScene {
  TransmitArrayLayout transmit;
  std::vector<ReceiveArrayLayout> receives;
  std::vector<Vec3> targets;
};

struct ObservationSet {
  std::vector<Tensor3> tensors;
  std::optional<std::vector<Tensor3>> noiseless;
  std::optional<CcpdFactors> truth;
};

/// Minimum angle between two targets' directions as seen from any anchor.
inline constexpr double kMinTargetSeparationRad = 1e-6;
inline constexpr int kTargetRetries = 100;

/// Uniform draws in `box`. Each target is redrawn until its direction from
/// every anchor differs from all earlier targets by kMinTargetSeparationRad.
std::vector<Vec3> sample_targets(const Box& box, std::size_t count, Rng& rng,
                                 std::span<const Vec3> anchors = {});

/// M independent K x R matrices of unit-variance circular Gaussian RCS.
std::vector<CMatrix> sample_rcs(std::size_t targets, std::size_t pulses, std::size_t arrays,
                                Rng& rng);

/// T x J circular Gaussian probing waveforms.
CMatrix sample_waveforms(std::size_t samples, std::size_t transmitters, Rng& rng);

/// Noiseless coupled observation tensors and ground-truth factors.
ObservationSet simulate(const RadarScene& scene, const CMatrix& waveforms,
                        std::span<const CMatrix> rcs);

/// Signals a noiseless request; add_noise returns the clean tensors.
inline constexpr double kNoiselessSnr = std::numeric_limits<double>::infinity();

/// Adds white circular Gaussian noise with per-entry variance
/// mean|X|^2 * 10^(-snr_db/10), the mean pooled over all arrays.
ObservationSet add_noise(const ObservationSet& obs, double snr_db, Rng& rng);

}  // namespace ccpd
