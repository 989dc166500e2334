#include "ccpd/localization.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace ccpd {

double line_distance_sq(const BearingLine& line, const Vec3& x) {
  const Vec3 d = x - line.anchor;
  const double along = d.dot(line.direction.vec());
  return d.squaredNorm() - along * along;
}

LocalizationResult fuse_lines(std::span<const BearingLine> lines) {
  if (lines.size() < 2) throw std::invalid_argument("fuse_lines: need at least two lines");
  Eigen::Matrix3d normal = Eigen::Matrix3d::Zero();
  Vec3 rhs = Vec3::Zero();
  // Anchors are shifted by their mean so that far-away scenes keep precision.
  Vec3 origin = Vec3::Zero();
  for (const BearingLine& l : lines) origin += l.anchor;
  origin /= static_cast<double>(lines.size());

  for (const BearingLine& l : lines) {
    const Vec3& v = l.direction.vec();
    const Eigen::Matrix3d proj = Eigen::Matrix3d::Identity() - v * v.transpose();
    normal += proj;
    rhs += proj * (l.anchor - origin);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(normal);
  if (eig.eigenvalues()[0] < 1e-10) {
    throw std::domain_error("fuse_lines: lines are parallel; position is not localizable");
  }
  LocalizationResult out;
  out.position = origin + normal.ldlt().solve(rhs);
  out.lines_used = lines.size();
  for (const BearingLine& l : lines) out.residual += line_distance_sq(l, out.position);
  out.residual = std::max(0.0, out.residual);
  return out;
}

std::vector<LocalizationResult> localize_all(const std::vector<std::vector<DoaEstimate>>& doas,
                                             std::span<const Vec3> centers) {
  if (doas.size() != centers.size()) throw std::invalid_argument("localize_all: one center per array");
  if (doas.empty()) return {};
  const std::size_t targets = doas.front().size();
  for (const auto& row : doas) {
    if (row.size() != targets) throw std::invalid_argument("localize_all: arrays disagree on R");
  }
  std::vector<LocalizationResult> out;
  out.reserve(targets);
  std::vector<BearingLine> lines(doas.size());
  for (std::size_t r = 0; r < targets; ++r) {
    for (std::size_t m = 0; m < doas.size(); ++m) lines[m] = {centers[m], doas[m][r].direction};
    out.push_back(fuse_lines(lines));
  }
  return out;
}

std::vector<std::size_t> solve_assignment(const Eigen::MatrixXd& cost) {
  const auto n = static_cast<std::size_t>(cost.rows());
  if (cost.cols() != cost.rows()) throw std::invalid_argument("solve_assignment: cost must be square");
  if (n == 0) return {};
  // Shortest augmenting path with potentials; 1-based work arrays.
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(static_cast<Eigen::Index>(i0 - 1), static_cast<Eigen::Index>(j - 1)) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> row_to_col(n);
  for (std::size_t j = 1; j <= n; ++j) row_to_col[p[j] - 1] = j - 1;
  return row_to_col;
}

Matching match_targets(std::span<const Vec3> estimates, std::span<const Vec3> truth) {
  if (estimates.size() != truth.size()) throw std::invalid_argument("match_targets: count mismatch");
  const auto n = static_cast<Eigen::Index>(estimates.size());
  Eigen::MatrixXd cost(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      cost(i, j) = (estimates[static_cast<std::size_t>(i)] - truth[static_cast<std::size_t>(j)]).squaredNorm();

  Matching m;
  m.truth_of = solve_assignment(cost);
  m.errors.resize(estimates.size());
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    const double sq = cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(m.truth_of[i]));
    m.errors[i] = std::sqrt(sq);
    m.total_sq += sq;
  }
  return m;
}

}  // namespace ccpd
