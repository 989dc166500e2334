#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "ccpd/types.hpp"

namespace ccpd {

/// Dense I x J x K complex tensor. Element (i, j, k) lives at
/// i + I * (j + J * k), so every frontal slice (fixed k) is a column-major
/// I x J matrix.
class Tensor3 {
 public:
  Tensor3() = default;
  Tensor3(std::size_t i, std::size_t j, std::size_t k);

  std::size_t dim1() const { return i_; }
  std::size_t dim2() const { return j_; }
  std::size_t dim3() const { return k_; }
  std::size_t size() const { return data_.size(); }

  cd& operator()(std::size_t i, std::size_t j, std::size_t k) { return data_[i + i_ * (j + j_ * k)]; }
  const cd& operator()(std::size_t i, std::size_t j, std::size_t k) const {
    return data_[i + i_ * (j + j_ * k)];
  }

  std::span<cd> data() { return data_; }
  std::span<const cd> data() const { return data_; }

  Eigen::Map<const CMatrix> frontal_slice(std::size_t k) const {
    return {data_.data() + i_ * j_ * k, static_cast<Eigen::Index>(i_), static_cast<Eigen::Index>(j_)};
  }

  double norm() const;

 private:
  std::size_t i_ = 0, j_ = 0, k_ = 0;
  std::vector<cd> data_;
};

/// Factor matrices of a coupled CPD: X^(m) = [A^(m), B, C^(m)].
struct CcpdFactors {
  std::vector<CMatrix> A;
  CMatrix B;
  std::vector<CMatrix> C;

  std::size_t rank() const { return static_cast<std::size_t>(B.cols()); }
};

/// Orthonormal basis (T x R) of the shared second-mode subspace.
struct CompressionBasis {
  CMatrix V;
};

/// (I*K) x J matrix with row i*K + k, column j holding T(i, j, k).
CMatrix mode2_unfold(const Tensor3& t);

/// Inverse of mode2_unfold.
Tensor3 mode2_fold(const CMatrix& m, std::size_t dim1, std::size_t dim3);

/// Column r is a_r (x) c_r, rows ordered like mode2_unfold.
CMatrix khatri_rao(const CMatrix& a, const CMatrix& c);

/// T(i,j,k) = sum_r A(i,r) B(j,r) C(k,r).
Tensor3 cpd_eval(const CMatrix& a, const CMatrix& b, const CMatrix& c);

/// Contracts mode 2 with w: result has mode-2 unfolding mode2_unfold(t) * w.
Tensor3 mode2_product(const Tensor3& t, const CMatrix& w);

/// Shared-subspace compression of the second mode. V spans the mode-2
/// column space of the stacked tensors; output m is X^(m) contracted with
/// conj(V), so [A, B, C] maps to [A, V^H B, C].
std::pair<std::vector<Tensor3>, CompressionBasis> joint_compress_mode2(
    std::span<const Tensor3> obs, std::size_t rank);

/// First-mode row selection T(idx, :, :).
Tensor3 subtensor_rows(const Tensor3& t, std::span<const std::size_t> idx);

struct Rank1 {
  CVector u;  // carries sigma_1
  CVector v;  // unit norm, largest-magnitude entry real positive
};

/// Best rank-1 approximation m ~ u v^T.
Rank1 rank1_approx(const CMatrix& m);

namespace kernels {

// Reference implementations. The parallel versions compute every output
// entry with the same accumulation order, so results are bit-identical.
namespace serial {
void cpd_eval(const CMatrix& a, const CMatrix& b, const CMatrix& c, Tensor3& out);
void khatri_rao(const CMatrix& a, const CMatrix& c, CMatrix& out);
void mode2_unfold(const Tensor3& t, CMatrix& out);
void mode2_product(const Tensor3& t, const CMatrix& w, Tensor3& out);
}  // namespace serial

namespace parallel {
void cpd_eval(const CMatrix& a, const CMatrix& b, const CMatrix& c, Tensor3& out);
void khatri_rao(const CMatrix& a, const CMatrix& c, CMatrix& out);
void mode2_unfold(const Tensor3& t, CMatrix& out);
void mode2_product(const Tensor3& t, const CMatrix& w, Tensor3& out);
}  // namespace parallel

}  // namespace kernels

}  // namespace ccpd
