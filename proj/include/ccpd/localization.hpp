#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ccpd/doa.hpp"
#include "ccpd/geometry.hpp"

namespace ccpd {

struct BearingLine {
  Vec3 anchor = Vec3::Zero();
  Direction direction{Vec3::UnitZ()};
};

struct LocalizationResult {
  Vec3 position = Vec3::Zero();
  double residual = 0.0;  // sum of squared point-to-line distances
  std::size_t lines_used = 0;
};

/// Point minimizing the sum of squared distances to all lines, from the
/// normal equations sum (I - v v^T) x = sum (I - v v^T) p. Throws
/// std::domain_error when the lines are (numerically) all parallel.
LocalizationResult fuse_lines(std::span<const BearingLine> lines);

/// Squared distance from x to a line.
double line_distance_sq(const BearingLine& line, const Vec3& x);

/// doas[m][r] is array m's estimate for target column r.
std::vector<LocalizationResult> localize_all(const std::vector<std::vector<DoaEstimate>>& doas,
                                             std::span<const Vec3> centers);

struct Matching {
  std::vector<std::size_t> truth_of;  // truth index assigned to estimate i
  std::vector<double> errors;         // |estimate_i - truth_{truth_of[i]}|
  double total_sq = 0.0;
};

/// Optimal assignment minimizing total squared position error (Hungarian).
Matching match_targets(std::span<const Vec3> estimates, std::span<const Vec3> truth);

/// Minimum-cost perfect assignment on an n x n cost matrix; result[i] is the
/// column assigned to row i.
std::vector<std::size_t> solve_assignment(const Eigen::MatrixXd& cost);

}  // namespace ccpd
