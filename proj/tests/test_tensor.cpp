#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "ccpd/tensor.hpp"
#include "test_support.hpp"

using namespace ccpd;
using namespace ccpd::testing;

namespace {

Tensor3 triple_loop_cpd(const CMatrix& a, const CMatrix& b, const CMatrix& c) {
  Tensor3 t(static_cast<std::size_t>(a.rows()), static_cast<std::size_t>(b.rows()), static_cast<std::size_t>(c.rows()));
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < b.rows(); ++j)
      for (Eigen::Index k = 0; k < c.rows(); ++k) {
        cd s{0, 0};
        for (Eigen::Index r = 0; r < a.cols(); ++r) s += a(i, r) * b(j, r) * c(k, r);
        t(i, j, k) = s;
      }
  return t;
}

double max_diff(const Tensor3& x, const Tensor3& y) {
  REQUIRE(x.size() == y.size());
  double m = 0.0;
  for (std::size_t n = 0; n < x.size(); ++n) m = std::max(m, std::abs(x.data()[n] - y.data()[n]));
  return m;
}

bool identical(const Tensor3& x, const Tensor3& y) {
  return x.dim1() == y.dim1() && x.dim2() == y.dim2() && x.dim3() == y.dim3() &&
         std::equal(x.data().begin(), x.data().end(), y.data().begin());
}

}  // namespace

TEST_CASE("mode2_unfold: index mapping") {
  Tensor3 one(1, 1, 1);
  one(0, 0, 0) = cd(3, -1);
  const CMatrix u1 = mode2_unfold(one);
  CHECK(u1.rows() == 1);
  CHECK(u1(0, 0) == cd(3, -1));

  Tensor3 t(2, 2, 2);
  for (int i = 1; i <= 2; ++i)
    for (int j = 1; j <= 2; ++j)
      for (int k = 1; k <= 2; ++k) t(i - 1, j - 1, k - 1) = 100.0 * i + 10.0 * j + k;
  const CMatrix u = mode2_unfold(t);
  // Rows (i,k) = (1,1),(1,2),(2,1),(2,2).
  CHECK(u(0, 0).real() == 111);
  CHECK(u(1, 0).real() == 112);
  CHECK(u(2, 0).real() == 211);
  CHECK(u(3, 0).real() == 212);
  CHECK(u(2, 1).real() == 221);  // 1-based entry (3,2)
}

TEST_CASE("khatri_rao: small cases") {
  CMatrix a(2, 1), c(2, 1);
  a << 1, 2;
  c << 3, 4;
  CMatrix expected(4, 1);
  expected << 3, 4, 6, 8;
  CHECK(khatri_rao(a, c) == expected);

  const CMatrix sel = khatri_rao(CMatrix::Identity(2, 2), CMatrix::Identity(2, 2));
  CMatrix s(4, 2);
  s << 1, 0, 0, 0, 0, 0, 0, 1;
  CHECK(sel == s);
  CHECK_THROWS_AS(khatri_rao(CMatrix::Ones(2, 2), CMatrix::Ones(2, 3)), std::invalid_argument);
}

TEST_CASE("cpd_eval: oracle and unfolding identity") {
  CHECK(max_diff(cpd_eval(CMatrix::Ones(2, 1), CMatrix::Ones(3, 1), CMatrix::Ones(4, 1)),
                 [] {
                   Tensor3 t(2, 3, 4);
                   for (cd& x : t.data()) x = 1.0;
                   return t;
                 }()) == 0.0);

  Rng rng(3);
  std::uniform_int_distribution<int> dim(1, 6);
  for (int trial = 0; trial < 100; ++trial) {
    const int i = dim(rng), j = dim(rng), k = dim(rng), r = dim(rng);
    const CMatrix a = random_cmatrix(i, r, rng), b = random_cmatrix(j, r, rng), c = random_cmatrix(k, r, rng);
    const Tensor3 t = cpd_eval(a, b, c);
    CHECK(max_diff(t, triple_loop_cpd(a, b, c)) < 1e-12);
    const CMatrix lhs = mode2_unfold(t);
    const CMatrix rhs = khatri_rao(a, c) * b.transpose();
    CHECK((lhs - rhs).norm() <= 1e-12 * (1.0 + rhs.norm()));
    CHECK(max_diff(mode2_fold(lhs, t.dim1(), t.dim3()), t) == 0.0);
  }
  CHECK_THROWS_AS(cpd_eval(CMatrix::Ones(2, 2), CMatrix::Ones(2, 1), CMatrix::Ones(2, 2)), std::invalid_argument);
}

TEST_CASE("cpd_eval: linear in each factor column") {
  Rng rng(4);
  const CMatrix a = random_cmatrix(3, 2, rng), b = random_cmatrix(4, 2, rng), c = random_cmatrix(5, 2, rng);
  CMatrix a2 = a;
  a2.col(1) *= cd(2.0, -1.0);
  const Tensor3 base = cpd_eval(a, b, c);
  const Tensor3 scaled = cpd_eval(a2, b, c);
  const Tensor3 term1 = cpd_eval(a.col(1), b.col(1), c.col(1));
  Tensor3 expected = base;
  for (std::size_t n = 0; n < expected.size(); ++n) expected.data()[n] += cd(1.0, -1.0) * term1.data()[n];
  CHECK(max_diff(scaled, expected) < 1e-12);
}

TEST_CASE("kernels: parallel matches serial reference bit for bit") {
  Rng rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    const CMatrix a = random_cmatrix(13, 7, rng), b = random_cmatrix(31, 7, rng), c = random_cmatrix(9, 7, rng);
    Tensor3 ts(13, 31, 9), tp(13, 31, 9);
    kernels::serial::cpd_eval(a, b, c, ts);
    kernels::parallel::cpd_eval(a, b, c, tp);
    CHECK(identical(ts, tp));

    CMatrix ks, kp;
    kernels::serial::khatri_rao(a, c, ks);
    kernels::parallel::khatri_rao(a, c, kp);
    CHECK(ks == kp);

    CMatrix us, up;
    kernels::serial::mode2_unfold(ts, us);
    kernels::parallel::mode2_unfold(ts, up);
    CHECK(us == up);

    const CMatrix w = random_cmatrix(31, 5, rng);
    Tensor3 cs, cp;
    kernels::serial::mode2_product(ts, w, cs);
    kernels::parallel::mode2_product(ts, w, cp);
    CHECK(identical(cs, cp));
    CHECK((mode2_unfold(cs) - us * w).norm() < 1e-10 * us.norm() * w.norm());
  }
}

TEST_CASE("joint_compress_mode2: noiseless exact rank") {
  Rng rng(21);
  const Eigen::Index t = 20, r = 4;
  const CMatrix b = random_cmatrix(t, r, rng);
  std::vector<Tensor3> obs;
  std::vector<CMatrix> as, cs;
  for (int m = 0; m < 3; ++m) {
    as.push_back(random_cmatrix(5, r, rng));
    cs.push_back(random_cmatrix(6, r, rng));
    obs.push_back(cpd_eval(as.back(), b, cs.back()));
  }
  auto [comp, basis] = joint_compress_mode2(obs, r);
  CHECK((basis.V.adjoint() * basis.V - CMatrix::Identity(r, r)).norm() < 1e-10);
  const CMatrix bc = basis.V.adjoint() * b;
  for (std::size_t m = 0; m < obs.size(); ++m) {
    CHECK(comp[m].dim2() == static_cast<std::size_t>(r));
    CHECK(max_diff(comp[m], cpd_eval(as[m], bc, cs[m])) < 1e-10 * obs[m].norm());
    // Expanding back with V recovers the data.
    const Tensor3 back = mode2_product(comp[m], basis.V.transpose());
    CHECK(max_diff(back, obs[m]) < 1e-10 * obs[m].norm());
  }
  CHECK_THROWS_AS(joint_compress_mode2(obs, r + 1), std::runtime_error);
}

TEST_CASE("joint_compress_mode2: full subspace and rank one") {
  Rng rng(22);
  const std::vector<Tensor3> obs{cpd_eval(random_cmatrix(4, 5, rng), random_cmatrix(5, 5, rng), random_cmatrix(3, 5, rng))};
  auto [comp, basis] = joint_compress_mode2(obs, 5);
  CHECK((basis.V * basis.V.adjoint() - CMatrix::Identity(5, 5)).norm() < 1e-10);
  CHECK(std::abs(comp[0].norm() - obs[0].norm()) < 1e-10 * obs[0].norm());

  const CMatrix a = random_cmatrix(3, 1, rng), b = random_cmatrix(6, 1, rng), c = random_cmatrix(2, 1, rng);
  const std::vector<Tensor3> single{cpd_eval(a, b, c)};
  auto [c1, b1] = joint_compress_mode2(single, 1);
  CHECK(column_angle(b1.V.col(0), b.col(0)) < 1e-10);
  CHECK_THROWS_AS(joint_compress_mode2(single, 7), std::invalid_argument);
}

TEST_CASE("subtensor_rows") {
  Rng rng(9);
  const CMatrix a = random_cmatrix(5, 3, rng), b = random_cmatrix(4, 3, rng), c = random_cmatrix(2, 3, rng);
  const Tensor3 t = cpd_eval(a, b, c);
  const std::vector<std::size_t> all{0, 1, 2, 3, 4};
  CHECK(identical(subtensor_rows(t, all), t));

  const std::vector<std::size_t> first{0};
  const Tensor3 s = subtensor_rows(t, first);
  CHECK(s.dim1() == 1);
  for (std::size_t j = 0; j < 4; ++j)
    for (std::size_t k = 0; k < 2; ++k) CHECK(s(0, j, k) == t(0, j, k));

  const std::vector<std::size_t> idx{1, 3, 4};
  CMatrix asel(3, 3);
  for (int p = 0; p < 3; ++p) asel.row(p) = a.row(static_cast<Eigen::Index>(idx[static_cast<std::size_t>(p)]));
  CHECK(max_diff(subtensor_rows(t, idx), cpd_eval(asel, b, c)) < 1e-12);

  const std::vector<std::size_t> bad{5};
  CHECK_THROWS_AS(subtensor_rows(t, bad), std::out_of_range);
}

TEST_CASE("rank1_approx") {
  Rng rng(12);
  const CVector a = random_cmatrix(6, 1, rng).col(0), c = random_cmatrix(4, 1, rng).col(0);
  const CMatrix m = a * c.transpose();
  const Rank1 r1 = rank1_approx(m);
  CHECK((m - r1.u * r1.v.transpose()).norm() < 1e-10 * m.norm());
  CHECK(std::abs(r1.v.norm() - 1.0) < 1e-12);
  Eigen::Index peak = 0;
  r1.v.cwiseAbs().maxCoeff(&peak);
  CHECK(std::abs(r1.v[peak].imag()) < 1e-14);
  CHECK(r1.v[peak].real() > 0);
  CHECK(column_angle(r1.u, a) < 1e-10);

  const Rank1 id = rank1_approx(CMatrix::Identity(2, 2));
  CHECK(std::abs((CMatrix::Identity(2, 2) - id.u * id.v.transpose()).norm() - 1.0) < 1e-12);

  const CMatrix noisy = m + 1e-6 * random_cmatrix(6, 4, rng);
  const Rank1 rn = rank1_approx(noisy);
  CHECK((noisy - rn.u * rn.v.transpose()).norm() <= 1e-5);

  for (int trial = 0; trial < 50; ++trial) {
    const CMatrix x = random_cmatrix(5, 7, rng);
    const Rank1 rx = rank1_approx(x);
    Eigen::JacobiSVD<CMatrix> svd(x);
    CHECK((x - rx.u * rx.v.transpose()).norm() <= svd.singularValues()[1] * std::sqrt(5.0) + 1e-12);
  }
  CHECK_THROWS_AS(rank1_approx(CMatrix::Zero(3, 3)), std::invalid_argument);
}
