#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ccpd/geometry.hpp"
#include "ccpd/rng.hpp"
#include "ccpd/tensor.hpp"

namespace ccpd {

// ---------------------------------------------------------------------------
// Identifiability
// ---------------------------------------------------------------------------

struct WorkingConditionReport {
  std::size_t min_tj = 0;           // min(T, J)
  std::size_t longest_subarray = 0; // I'
  std::size_t shift_rows = 0;       // (I' - 1) K
  std::size_t rank = 0;
  bool signal_ok = false;           // min(T, J) >= R
  bool shift_ok = false;            // (I' - 1) K >= R
  bool pass = false;
  std::string message;
};

/// Generic identifiability conditions min(T,J) >= R and (I'-1)K >= R, with I'
/// the longest subarray over all arrays. Report only; never throws.
WorkingConditionReport check_working_conditions(std::size_t samples, std::size_t transmitters,
                                                std::size_t pulses, std::size_t rank,
                                                std::span<const std::size_t> subarray_lengths);

// ---------------------------------------------------------------------------
// Target matrices
// ---------------------------------------------------------------------------

/// Relative condition number above which the shift block is treated as rank
/// deficient.
inline constexpr double kMaxShiftCondition = 1e10;

struct TargetMatrixTag {
  std::size_t array = 0;
  Axis axis = Axis::x;
  int subarray = 1;

  friend bool operator==(const TargetMatrixTag&, const TargetMatrixTag&) = default;
};

std::string to_string(const TargetMatrixTag& tag);

struct SkippedTarget {
  TargetMatrixTag tag;
  double condition = 0.0;
  std::string reason;
};

struct TargetMatrixSet {
  std::vector<CMatrix> mats;
  std::vector<TargetMatrixTag> tags;
  std::vector<double> conditioning;
  std::vector<SkippedTarget> skipped;

  std::size_t size() const { return mats.size(); }
};

class RankDeficientError : public std::runtime_error {
 public:
  RankDeficientError(const std::string& what, double condition)
      : std::runtime_error(what), condition_(condition) {}
  double condition() const { return condition_; }

 private:
  double condition_;
};

struct TargetMatrix {
  CMatrix G;
  double condition = 0.0;
};

/// Shift-invariance target matrix of an L x R x K subtensor whose first
/// factor is Vandermonde: G = (M1^+ M2)^T where M1 drops the last sensor's
/// rows of the mode-2 unfolding and M2 the first sensor's. For [A_v, B, C],
/// G = B diag(z) B^{-1}. Throws RankDeficientError if M1's condition number
/// exceeds kMaxShiftCondition, std::invalid_argument if L < 2.
TargetMatrix build_target_matrix(const Tensor3& sub);

/// Builds up to four target matrices per array (order x1, x2, y1, y2 per
/// array). Deficient subarrays are recorded in `skipped`. Throws
/// std::runtime_error if fewer than two matrices survive.
TargetMatrixSet build_all_targets(std::span<const Tensor3> compressed,
                                  std::span<const ReceiveArrayLayout> layouts, std::size_t rank);

// ---------------------------------------------------------------------------
// Joint eigenvalue decomposition
// ---------------------------------------------------------------------------

struct JevdSolution {
  CMatrix B;  // R x R, unit-norm columns
  CMatrix F;  // W x R, row w = diag(B^{-1} G_w B)
  double offdiag_residual = 0.0;
  double initial_residual = 0.0;
  int iterations = 0;
};

/// sum_w ||offdiag(B^{-1} G_w B)||^2 / sum_w ||G_w||^2
double offdiag_residual(std::span<const CMatrix> mats, const CMatrix& b);

/// Algebraic initializer: eigenvectors of the pencil formed by two random
/// unit-norm mixtures of all target matrices. Columns have unit norm.
CMatrix gevd_init(const TargetMatrixSet& tm, Rng& rng);

struct RefineOptions {
  int max_iterations = 200;
  double relative_tolerance = 1e-12;
};

/// Locally minimizes offdiag_residual over invertible B with unit-norm
/// columns, starting at b0. The returned residual never exceeds b0's.
JevdSolution refine_joint_diag(std::span<const CMatrix> mats, const CMatrix& b0,
                               const RefineOptions& opts = {});
JevdSolution refine_joint_diag(const TargetMatrixSet& tm, const CMatrix& b0,
                               const RefineOptions& opts = {});

// ---------------------------------------------------------------------------
// Factor recovery and full pipeline
// ---------------------------------------------------------------------------

/// A^(m), C^(m) from rank-1 approximations of unvec((T_2 B^{-T})(:, r)).
/// Each a_r is scaled so its origin-element entry is 1. The returned B is the
/// compressed basis passed in.
CcpdFactors recover_factors(std::span<const Tensor3> compressed, const CMatrix& b,
                            std::span<const ReceiveArrayLayout> layouts);

struct StageTimes {
  double compress_ms = 0.0;
  double targets_ms = 0.0;
  double gevd_ms = 0.0;
  double refine_ms = 0.0;
  double recover_ms = 0.0;
};

struct SolveDiagnostics {
  WorkingConditionReport conditions;
  std::vector<TargetMatrixTag> used;
  std::vector<double> conditioning;
  std::vector<SkippedTarget> skipped;
  double initial_residual = 0.0;
  double offdiag_residual = 0.0;
  int refine_iterations = 0;
  StageTimes times;
  std::vector<std::string> warnings;
};

struct SolveResult {
  CcpdFactors factors;  // B expanded back to T x R
  JevdSolution jevd;    // in the compressed R x R space
  SolveDiagnostics diagnostics;
};

struct SolveOptions {
  std::size_t transmitters = 0;  // J, for the working-condition report; 0 = unknown
  RefineOptions refine;
};

/// Compression, target matrices, GEVD, refinement, factor recovery.
SolveResult solve(std::span<const Tensor3> obs, std::span<const ReceiveArrayLayout> layouts,
                  std::size_t rank, Rng& rng, const SolveOptions& opts = {});

}  // namespace ccpd
