#include "ccpd/jevd.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/QR>
#include <Eigen/SVD>

namespace ccpd {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

void normalize_columns(CMatrix& b) {
  for (Eigen::Index r = 0; r < b.cols(); ++r) {
    const double n = b.col(r).norm();
    if (n > 0.0) b.col(r) /= n;
  }
}

double matrix_condition(const CMatrix& m) {
  Eigen::JacobiSVD<CMatrix> svd(m);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s[s.size() - 1] == 0.0) return std::numeric_limits<double>::infinity();
  return s[0] / s[s.size() - 1];
}

// B^{-1} G_w B for every w; empty if B is singular.
std::vector<CMatrix> similarity_transforms(std::span<const CMatrix> mats, const CMatrix& b) {
  Eigen::PartialPivLU<CMatrix> lu(b);
  if (!(std::abs(lu.determinant()) > 0.0)) return {};
  std::vector<CMatrix> out;
  out.reserve(mats.size());
  for (const CMatrix& g : mats) out.push_back(lu.solve(g * b));
  return out;
}

double offdiag_energy(std::span<const CMatrix> transformed) {
  double s = 0.0;
  for (const CMatrix& d : transformed) s += d.squaredNorm() - d.diagonal().squaredNorm();
  return s;
}

double total_energy(std::span<const CMatrix> mats) {
  double s = 0.0;
  for (const CMatrix& g : mats) s += g.squaredNorm();
  return s;
}

double residual_of(std::span<const CMatrix> mats, const CMatrix& b, double total) {
  const auto d = similarity_transforms(mats, b);
  if (d.empty()) return std::numeric_limits<double>::infinity();
  const double r = offdiag_energy(d) / total;
  return std::isfinite(r) ? r : std::numeric_limits<double>::infinity();
}

}  // namespace

WorkingConditionReport check_working_conditions(std::size_t samples, std::size_t transmitters,
                                                std::size_t pulses, std::size_t rank,
                                                std::span<const std::size_t> subarray_lengths) {
  WorkingConditionReport rep;
  rep.rank = rank;
  rep.min_tj = std::min(samples, transmitters);
  rep.longest_subarray =
      subarray_lengths.empty() ? 0 : *std::max_element(subarray_lengths.begin(), subarray_lengths.end());
  rep.shift_rows = rep.longest_subarray > 0 ? (rep.longest_subarray - 1) * pulses : 0;
  rep.signal_ok = rep.min_tj >= rank;
  rep.shift_ok = rep.shift_rows >= rank;
  rep.pass = rep.signal_ok && rep.shift_ok;

  std::ostringstream msg;
  msg << "min(T,J) = " << rep.min_tj << (rep.signal_ok ? " >= " : " < ") << rank << "; (I'-1)K = "
      << rep.shift_rows << (rep.shift_ok ? " >= " : " < ") << rank << " -> "
      << (rep.pass ? "pass" : "fail");
  rep.message = msg.str();
  return rep;
}

std::string to_string(const TargetMatrixTag& tag) {
  std::ostringstream s;
  s << "array " << tag.array << ' ' << (tag.axis == Axis::x ? 'x' : 'y') << tag.subarray;
  return s.str();
}

TargetMatrix build_target_matrix(const Tensor3& sub) {
  const std::size_t sensors = sub.dim1();
  const auto rank = static_cast<Eigen::Index>(sub.dim2());
  const auto pulses = static_cast<Eigen::Index>(sub.dim3());
  if (sensors < 2) throw std::invalid_argument("build_target_matrix: need at least two sensors");

  const Eigen::Index rows = static_cast<Eigen::Index>(sensors - 1) * pulses;
  if (rows < rank) {
    throw RankDeficientError("build_target_matrix: shift block has fewer rows than R",
                             std::numeric_limits<double>::infinity());
  }
  const CMatrix unfolded = mode2_unfold(sub);
  const CMatrix m1 = unfolded.topRows(rows);
  const CMatrix m2 = unfolded.bottomRows(rows);

  // M1 = Q Rt; pinv(M1) M2 = pinv(Rt) (Q^H M2)_{0:R}, and Rt shares M1's singular values.
  const Eigen::HouseholderQR<CMatrix> qr(m1);
  const CMatrix rt = qr.matrixQR().topRows(rank).triangularView<Eigen::Upper>();
  CMatrix qm2 = m2;
  qm2.applyOnTheLeft(qr.householderQ().adjoint());

  Eigen::JacobiSVD<CMatrix> svd(rt, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double smin = s[s.size() - 1];
  const double cond = smin > 0.0 ? s[0] / smin : std::numeric_limits<double>::infinity();
  if (!(cond <= kMaxShiftCondition)) {
    throw RankDeficientError("build_target_matrix: shift block is rank deficient", cond);
  }

  const CMatrix x = svd.matrixV() * s.cwiseInverse().asDiagonal() * (svd.matrixU().adjoint() * qm2.topRows(rank));
  return {x.transpose(), cond};
}

TargetMatrixSet build_all_targets(std::span<const Tensor3> compressed,
                                  std::span<const ReceiveArrayLayout> layouts, std::size_t rank) {
  if (compressed.size() != layouts.size()) {
    throw std::invalid_argument("build_all_targets: one layout per tensor required");
  }
  TargetMatrixSet set;
  for (std::size_t m = 0; m < compressed.size(); ++m) {
    const Tensor3& t = compressed[m];
    if (t.dim2() != rank) throw std::invalid_argument("build_all_targets: second mode must equal R");
    if (t.dim1() != layouts[m].size()) {
      throw std::invalid_argument("build_all_targets: first mode must equal element count");
    }
    for (const SubarrayView& view : layouts[m].subarrays()) {
      const TargetMatrixTag tag{m, view.axis, view.part};
      if (view.indices->size() < 2) {
        set.skipped.push_back({tag, std::numeric_limits<double>::infinity(), "single-element subarray"});
        continue;
      }
      try {
        TargetMatrix tmx = build_target_matrix(subtensor_rows(t, *view.indices));
        set.mats.push_back(std::move(tmx.G));
        set.tags.push_back(tag);
        set.conditioning.push_back(tmx.condition);
      } catch (const RankDeficientError& e) {
        set.skipped.push_back({tag, e.condition(), e.what()});
      }
    }
  }
  if (set.size() < 2) {
    throw std::runtime_error("build_all_targets: fewer than two usable target matrices");
  }
  return set;
}

double offdiag_residual(std::span<const CMatrix> mats, const CMatrix& b) {
  return residual_of(mats, b, total_energy(mats));
}

CMatrix gevd_init(const TargetMatrixSet& tm, Rng& rng) {
  if (tm.size() < 1) throw std::invalid_argument("gevd_init: no target matrices");
  const Eigen::Index rank = tm.mats.front().rows();
  if (rank == 1) return CMatrix::Ones(1, 1);

  constexpr int kAttempts = 10;
  for (int attempt = 0; attempt < kAttempts; ++attempt) {
    CVector alpha(static_cast<Eigen::Index>(tm.size()));
    CVector beta(alpha.size());
    for (Eigen::Index w = 0; w < alpha.size(); ++w) {
      alpha[w] = complex_gaussian(rng);
      beta[w] = complex_gaussian(rng);
    }
    alpha.normalize();
    beta.normalize();

    CMatrix h1 = CMatrix::Zero(rank, rank);
    CMatrix h2 = CMatrix::Zero(rank, rank);
    for (std::size_t w = 0; w < tm.size(); ++w) {
      h1 += alpha[static_cast<Eigen::Index>(w)] * tm.mats[w];
      h2 += beta[static_cast<Eigen::Index>(w)] * tm.mats[w];
    }

    Eigen::PartialPivLU<CMatrix> lu(h2);
    if (!(lu.rcond() > 1e-12)) continue;
    Eigen::ComplexEigenSolver<CMatrix> eig(lu.solve(h1));
    if (eig.info() != Eigen::Success) continue;
    CMatrix b0 = eig.eigenvectors();
    normalize_columns(b0);
    if (!(matrix_condition(b0) < 1e12)) continue;
    return b0;
  }
  throw std::runtime_error("gevd_init: pencil singular or defective for every mixture");
}

JevdSolution refine_joint_diag(std::span<const CMatrix> mats, const CMatrix& b0,
                               const RefineOptions& opts) {
  if (mats.empty()) throw std::invalid_argument("refine_joint_diag: no target matrices");
  const Eigen::Index rank = b0.rows();
  const double total = total_energy(mats);
  if (!(total > 0.0)) throw std::invalid_argument("refine_joint_diag: all target matrices are zero");

  CMatrix b = b0;
  normalize_columns(b);
  double res = residual_of(mats, b, total);
  if (!std::isfinite(res)) throw std::invalid_argument("refine_joint_diag: initial basis is singular");

  JevdSolution sol;
  sol.initial_residual = res;
  int iter = 0;
  for (; iter < opts.max_iterations; ++iter) {
    if (res == 0.0) break;
    const auto d = similarity_transforms(mats, b);

    // First-order update B <- B (I + E): off-diagonal (i,j) of every
    // transformed matrix changes by E_ij (d_i - d_j); least squares over w.
    CMatrix e = CMatrix::Zero(rank, rank);
    for (Eigen::Index i = 0; i < rank; ++i) {
      for (Eigen::Index j = 0; j < rank; ++j) {
        if (i == j) continue;
        cd num{0.0, 0.0};
        double den = 0.0;
        for (const CMatrix& dw : d) {
          const cd gap = dw(i, i) - dw(j, j);
          num += std::conj(gap) * dw(i, j);
          den += std::norm(gap);
        }
        if (den > 0.0) e(i, j) = -num / den;
      }
    }

    bool improved = false;
    double next_res = res;
    CMatrix next;
    for (double step = 1.0; step >= 1.0 / 1024.0; step /= 2.0) {
      next = b * (CMatrix::Identity(rank, rank) + step * e);
      normalize_columns(next);
      next_res = residual_of(mats, next, total);
      if (next_res < res) {
        improved = true;
        break;
      }
    }
    if (!improved) break;
    const double decrease = (res - next_res) / res;
    b = std::move(next);
    res = next_res;
    if (decrease < opts.relative_tolerance) {
      ++iter;
      break;
    }
  }

  const auto d = similarity_transforms(mats, b);
  sol.F.resize(static_cast<Eigen::Index>(mats.size()), rank);
  for (std::size_t w = 0; w < d.size(); ++w) sol.F.row(static_cast<Eigen::Index>(w)) = d[w].diagonal().transpose();
  sol.B = std::move(b);
  sol.offdiag_residual = res;
  sol.iterations = iter;
  return sol;
}

JevdSolution refine_joint_diag(const TargetMatrixSet& tm, const CMatrix& b0,
                               const RefineOptions& opts) {
  return refine_joint_diag(std::span<const CMatrix>(tm.mats), b0, opts);
}

CcpdFactors recover_factors(std::span<const Tensor3> compressed, const CMatrix& b,
                            std::span<const ReceiveArrayLayout> layouts) {
  if (compressed.size() != layouts.size()) {
    throw std::invalid_argument("recover_factors: one layout per tensor required");
  }
  Eigen::PartialPivLU<CMatrix> lu(b);
  if (!(std::abs(lu.determinant()) > 0.0)) throw std::invalid_argument("recover_factors: B is singular");
  const Eigen::Index rank = b.cols();

  CcpdFactors out;
  out.B = b;
  for (std::size_t m = 0; m < compressed.size(); ++m) {
    const Tensor3& t = compressed[m];
    if (static_cast<Eigen::Index>(t.dim2()) != rank) {
      throw std::invalid_argument("recover_factors: second mode must equal R");
    }
    const auto sensors = static_cast<Eigen::Index>(t.dim1());
    const auto pulses = static_cast<Eigen::Index>(t.dim3());
    // T_2 B^{-T} = (B^{-1} T_2^T)^T, which is A (.) C in the noiseless case.
    const CMatrix kr = lu.solve(mode2_unfold(t).transpose()).transpose();

    CMatrix a(sensors, rank);
    CMatrix c(pulses, rank);
    const auto origin = static_cast<Eigen::Index>(layouts[m].origin_index);
    for (Eigen::Index r = 0; r < rank; ++r) {
      const CMatrix omega = kr.col(r).reshaped(pulses, sensors).transpose();
      if (omega.norm() == 0.0) {
        throw std::runtime_error("recover_factors: target " + std::to_string(r) +
                                 " not observed by array " + std::to_string(m));
      }
      Rank1 r1 = rank1_approx(omega);
      const cd ref = r1.u[origin];
      if (!(std::abs(ref) > 0.0)) {
        throw std::runtime_error("recover_factors: zero origin entry for target " + std::to_string(r));
      }
      a.col(r) = r1.u / ref;
      c.col(r) = r1.v * ref;
    }
    out.A.push_back(std::move(a));
    out.C.push_back(std::move(c));
  }
  return out;
}

SolveResult solve(std::span<const Tensor3> obs, std::span<const ReceiveArrayLayout> layouts,
                  std::size_t rank, Rng& rng, const SolveOptions& opts) {
  if (obs.empty() || obs.size() != layouts.size()) {
    throw std::invalid_argument("solve: need one layout per observation tensor");
  }
  SolveResult result;
  SolveDiagnostics& diag = result.diagnostics;

  std::vector<std::size_t> lengths;
  for (const ReceiveArrayLayout& l : layouts) {
    for (int len : {l.axis_x.len_a, l.axis_x.len_b, l.axis_y.len_a, l.axis_y.len_b}) {
      lengths.push_back(static_cast<std::size_t>(len));
    }
  }
  const std::size_t samples = obs.front().dim2();
  const std::size_t transmitters = opts.transmitters > 0 ? opts.transmitters : samples;
  diag.conditions = check_working_conditions(samples, transmitters, obs.front().dim3(), rank, lengths);
  if (!diag.conditions.pass) diag.warnings.push_back("working conditions fail: " + diag.conditions.message);

  auto start = Clock::now();
  auto [compressed, basis] = joint_compress_mode2(obs, rank);
  diag.times.compress_ms = ms_since(start);

  start = Clock::now();
  TargetMatrixSet tm = build_all_targets(compressed, layouts, rank);
  diag.times.targets_ms = ms_since(start);
  diag.used = tm.tags;
  diag.conditioning = tm.conditioning;
  diag.skipped = tm.skipped;
  for (const SkippedTarget& s : tm.skipped) diag.warnings.push_back("skipped " + to_string(s.tag) + ": " + s.reason);

  start = Clock::now();
  const CMatrix b0 = gevd_init(tm, rng);
  diag.times.gevd_ms = ms_since(start);

  start = Clock::now();
  result.jevd = refine_joint_diag(tm, b0, opts.refine);
  diag.times.refine_ms = ms_since(start);
  diag.initial_residual = result.jevd.initial_residual;
  diag.offdiag_residual = result.jevd.offdiag_residual;
  diag.refine_iterations = result.jevd.iterations;

  start = Clock::now();
  result.factors = recover_factors(compressed, result.jevd.B, layouts);
  result.factors.B = basis.V * result.jevd.B;
  diag.times.recover_ms = ms_since(start);
  return result;
}

}  // namespace ccpd
