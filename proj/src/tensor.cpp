#include "ccpd/tensor.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/SVD>

namespace ccpd {

Tensor3::Tensor3(std::size_t i, std::size_t j, std::size_t k)
    : i_(i), j_(j), k_(k), data_(i * j * k, cd{0.0, 0.0}) {}

double Tensor3::norm() const {
  double s = 0.0;
  for (const cd& x : data_) s += std::norm(x);
  return std::sqrt(s);
}

CMatrix mode2_unfold(const Tensor3& t) {
  CMatrix out;
  kernels::parallel::mode2_unfold(t, out);
  return out;
}

Tensor3 mode2_fold(const CMatrix& m, std::size_t dim1, std::size_t dim3) {
  if (static_cast<std::size_t>(m.rows()) != dim1 * dim3) {
    throw std::invalid_argument("mode2_fold: row count is not dim1 * dim3");
  }
  Tensor3 t(dim1, static_cast<std::size_t>(m.cols()), dim3);
  for (std::size_t j = 0; j < t.dim2(); ++j)
    for (std::size_t i = 0; i < dim1; ++i)
      for (std::size_t k = 0; k < dim3; ++k)
        t(i, j, k) = m(static_cast<Eigen::Index>(i * dim3 + k), static_cast<Eigen::Index>(j));
  return t;
}

CMatrix khatri_rao(const CMatrix& a, const CMatrix& c) {
  CMatrix out;
  kernels::parallel::khatri_rao(a, c, out);
  return out;
}

Tensor3 cpd_eval(const CMatrix& a, const CMatrix& b, const CMatrix& c) {
  if (a.cols() != b.cols() || a.cols() != c.cols()) {
    throw std::invalid_argument("cpd_eval: factor column counts differ");
  }
  Tensor3 out(static_cast<std::size_t>(a.rows()), static_cast<std::size_t>(b.rows()),
              static_cast<std::size_t>(c.rows()));
  kernels::parallel::cpd_eval(a, b, c, out);
  return out;
}

Tensor3 mode2_product(const Tensor3& t, const CMatrix& w) {
  Tensor3 out;
  kernels::parallel::mode2_product(t, w, out);
  return out;
}

std::pair<std::vector<Tensor3>, CompressionBasis> joint_compress_mode2(
    std::span<const Tensor3> obs, std::size_t rank) {
  if (obs.empty()) throw std::invalid_argument("joint_compress_mode2: no tensors");
  if (rank == 0) throw std::invalid_argument("joint_compress_mode2: rank must be positive");
  const std::size_t cols = obs.front().dim2();
  std::size_t rows = 0;
  for (const Tensor3& t : obs) {
    if (t.dim2() != cols) throw std::invalid_argument("joint_compress_mode2: second dims differ");
    rows += t.dim1() * t.dim3();
  }
  if (rank > cols || rank > rows) {
    throw std::invalid_argument("joint_compress_mode2: rank " + std::to_string(rank) +
                                " exceeds stacked unfolding dimensions");
  }

  CMatrix stacked(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  Eigen::Index offset = 0;
  for (const Tensor3& t : obs) {
    CMatrix u = mode2_unfold(t);
    stacked.middleRows(offset, u.rows()) = u;
    offset += u.rows();
  }

  Eigen::BDCSVD<CMatrix> svd(stacked, Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const auto r = static_cast<Eigen::Index>(rank);
  if (!(sv[0] > 0.0) || sv[r - 1] <= sv[0] * 1e-12) {
    throw std::runtime_error("joint_compress_mode2: stacked unfolding has rank below " +
                             std::to_string(rank));
  }

  // Right singular vectors of the unfolding are conj of the column-space
  // basis of the shared factor.
  CompressionBasis basis{svd.matrixV().leftCols(r).conjugate()};
  const CMatrix w = basis.V.conjugate();

  std::vector<Tensor3> out;
  out.reserve(obs.size());
  for (const Tensor3& t : obs) out.push_back(mode2_product(t, w));
  return {std::move(out), std::move(basis)};
}

Tensor3 subtensor_rows(const Tensor3& t, std::span<const std::size_t> idx) {
  Tensor3 out(idx.size(), t.dim2(), t.dim3());
  for (std::size_t p = 0; p < idx.size(); ++p) {
    if (idx[p] >= t.dim1()) throw std::out_of_range("subtensor_rows: index out of bounds");
  }
  for (std::size_t k = 0; k < t.dim3(); ++k)
    for (std::size_t j = 0; j < t.dim2(); ++j)
      for (std::size_t p = 0; p < idx.size(); ++p) out(p, j, k) = t(idx[p], j, k);
  return out;
}

Rank1 rank1_approx(const CMatrix& m) {
  if (m.size() == 0 || m.norm() == 0.0) throw std::invalid_argument("rank1_approx: zero matrix");
  Eigen::JacobiSVD<CMatrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const double s1 = svd.singularValues()[0];
  CVector u = s1 * svd.matrixU().col(0);
  CVector v = svd.matrixV().col(0).conjugate();

  Eigen::Index peak = 0;
  v.cwiseAbs().maxCoeff(&peak);
  const cd phase = v[peak] / std::abs(v[peak]);
  v *= std::conj(phase);
  u *= phase;
  return {std::move(u), std::move(v)};
}

}  // namespace ccpd
