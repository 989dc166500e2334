#include <cstdint>
#include <stdexcept>
#include <tuple>

#include "ccpd/tensor.hpp"

namespace ccpd::kernels {

namespace {

using idx_t = std::int64_t;

inline cd cpd_entry(const CMatrix& a, const CMatrix& b, const CMatrix& c, idx_t i, idx_t j,
                    idx_t k) {
  cd acc{0.0, 0.0};
  for (idx_t r = 0; r < a.cols(); ++r) acc += a(i, r) * b(j, r) * c(k, r);
  return acc;
}

inline cd contract_entry(const Tensor3& t, const CMatrix& w, std::size_t i, std::size_t r,
                         std::size_t k) {
  cd acc{0.0, 0.0};
  for (std::size_t j = 0; j < t.dim2(); ++j) {
    acc += t(i, j, k) * w(static_cast<idx_t>(j), static_cast<idx_t>(r));
  }
  return acc;
}

void check_cpd(const CMatrix& a, const CMatrix& b, const CMatrix& c, const Tensor3& out) {
  if (a.cols() != b.cols() || a.cols() != c.cols()) {
    throw std::invalid_argument("cpd_eval: factor column counts differ");
  }
  if (out.dim1() != static_cast<std::size_t>(a.rows()) ||
      out.dim2() != static_cast<std::size_t>(b.rows()) ||
      out.dim3() != static_cast<std::size_t>(c.rows())) {
    throw std::invalid_argument("cpd_eval: output shape mismatch");
  }
}

void prepare_kr(const CMatrix& a, const CMatrix& c, CMatrix& out) {
  if (a.cols() != c.cols()) throw std::invalid_argument("khatri_rao: column counts differ");
  out.resize(a.rows() * c.rows(), a.cols());
}

void prepare_contract(const Tensor3& t, const CMatrix& w, Tensor3& out) {
  if (static_cast<std::size_t>(w.rows()) != t.dim2()) {
    throw std::invalid_argument("mode2_product: inner dimension mismatch");
  }
  out = Tensor3(t.dim1(), static_cast<std::size_t>(w.cols()), t.dim3());
}

}  // namespace

namespace serial {

void cpd_eval(const CMatrix& a, const CMatrix& b, const CMatrix& c, Tensor3& out) {
  check_cpd(a, b, c, out);
  for (idx_t k = 0; k < c.rows(); ++k)
    for (idx_t j = 0; j < b.rows(); ++j)
      for (idx_t i = 0; i < a.rows(); ++i) out(i, j, k) = cpd_entry(a, b, c, i, j, k);
}

void khatri_rao(const CMatrix& a, const CMatrix& c, CMatrix& out) {
  prepare_kr(a, c, out);
  const idx_t kdim = c.rows();
  for (idx_t r = 0; r < a.cols(); ++r)
    for (idx_t i = 0; i < a.rows(); ++i)
      for (idx_t k = 0; k < kdim; ++k) out(i * kdim + k, r) = a(i, r) * c(k, r);
}

void mode2_unfold(const Tensor3& t, CMatrix& out) {
  const auto kdim = static_cast<idx_t>(t.dim3());
  out.resize(static_cast<idx_t>(t.dim1()) * kdim, static_cast<idx_t>(t.dim2()));
  for (std::size_t j = 0; j < t.dim2(); ++j)
    for (std::size_t i = 0; i < t.dim1(); ++i)
      for (std::size_t k = 0; k < t.dim3(); ++k)
        out(static_cast<idx_t>(i) * kdim + static_cast<idx_t>(k), static_cast<idx_t>(j)) = t(i, j, k);
}

void mode2_product(const Tensor3& t, const CMatrix& w, Tensor3& out) {
  prepare_contract(t, w, out);
  for (std::size_t k = 0; k < out.dim3(); ++k)
    for (std::size_t r = 0; r < out.dim2(); ++r)
      for (std::size_t i = 0; i < out.dim1(); ++i) out(i, r, k) = contract_entry(t, w, i, r, k);
}

}  // namespace serial

namespace parallel {

void cpd_eval(const CMatrix& a, const CMatrix& b, const CMatrix& c, Tensor3& out) {
  check_cpd(a, b, c, out);
  const idx_t kdim = c.rows(), jdim = b.rows(), idim = a.rows();
#pragma omp parallel for collapse(2) schedule(static)
  for (idx_t k = 0; k < kdim; ++k)
    for (idx_t j = 0; j < jdim; ++j)
      for (idx_t i = 0; i < idim; ++i) out(i, j, k) = cpd_entry(a, b, c, i, j, k);
}

void khatri_rao(const CMatrix& a, const CMatrix& c, CMatrix& out) {
  prepare_kr(a, c, out);
  const idx_t kdim = c.rows(), idim = a.rows(), rdim = a.cols();
#pragma omp parallel for collapse(2) schedule(static)
  for (idx_t r = 0; r < rdim; ++r)
    for (idx_t i = 0; i < idim; ++i)
      for (idx_t k = 0; k < kdim; ++k) out(i * kdim + k, r) = a(i, r) * c(k, r);
}

void mode2_unfold(const Tensor3& t, CMatrix& out) {
  const auto kdim = static_cast<idx_t>(t.dim3());
  const auto idim = static_cast<idx_t>(t.dim1());
  const auto jdim = static_cast<idx_t>(t.dim2());
  out.resize(idim * kdim, jdim);
#pragma omp parallel for collapse(2) schedule(static)
  for (idx_t j = 0; j < jdim; ++j)
    for (idx_t i = 0; i < idim; ++i)
      for (idx_t k = 0; k < kdim; ++k)
        out(i * kdim + k, j) = t(static_cast<std::size_t>(i), static_cast<std::size_t>(j),
                                 static_cast<std::size_t>(k));
}

void mode2_product(const Tensor3& t, const CMatrix& w, Tensor3& out) {
  prepare_contract(t, w, out);
  const auto kdim = static_cast<idx_t>(out.dim3());
  const auto rdim = static_cast<idx_t>(out.dim2());
  const auto idim = static_cast<idx_t>(out.dim1());
#pragma omp parallel for collapse(2) schedule(static)
  for (idx_t k = 0; k < kdim; ++k)
    for (idx_t r = 0; r < rdim; ++r)
      for (idx_t i = 0; i < idim; ++i) {
        const auto [ii, rr, kk] = std::tuple{static_cast<std::size_t>(i), static_cast<std::size_t>(r),
                                             static_cast<std::size_t>(k)};
        out(ii, rr, kk) = contract_entry(t, w, ii, rr, kk);
      }
}

}  // namespace parallel

}  // namespace ccpd::kernels
