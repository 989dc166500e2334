#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "ccpd/doa.hpp"
#include "test_support.hpp"

using namespace ccpd;
using namespace ccpd::testing;

namespace {

GeneratorEstimate gen(double u, int pitch, double weight) {
  return {std::polar(1.0, kPi * pitch * u), pitch, weight};
}

}  // namespace

TEST_CASE("estimate_generator") {
  CVector a(4);
  a << cd(1, 0), cd(0, 1), cd(-1, 0), cd(0, -1);
  const GeneratorEstimate g = estimate_generator(a, 1);
  CHECK(std::abs(g.z - cd(0, 1)) < 1e-15);
  CHECK(g.weight == 3.0);
  CHECK(g.pitch == 1);

  const GeneratorEstimate ones = estimate_generator(CVector::Ones(5), 3);
  CHECK(std::abs(ones.z - 1.0) < 1e-15);

  // Global complex scaling is irrelevant.
  const GeneratorEstimate scaled = estimate_generator(CVector(cd(-2.5, 7.0) * a), 1);
  CHECK(std::abs(scaled.z - g.z) < 1e-14);

  // Small perturbations move the estimate little and keep it on the circle.
  Rng rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const cd z = random_unit(rng);
    CVector v(6);
    for (Eigen::Index l = 0; l < 6; ++l) v[l] = std::pow(z, static_cast<double>(l));
    const CMatrix noisy = v + 1e-6 * random_cmatrix(6, 1, rng);
    const GeneratorEstimate e = estimate_generator(CVector(noisy.col(0)), 2);
    CHECK(std::abs(std::abs(e.z) - 1.0) < 1e-14);
    CHECK(std::abs(e.z - z) < 1e-5);
  }
}

TEST_CASE("resolve_coprime: examples") {
  const CoprimeResolution half = resolve_coprime(gen(0.5, 4, 3), gen(0.5, 7, 3));
  CHECK(half.u == doctest::Approx(0.5).epsilon(1e-12));
  CHECK_FALSE(half.flagged);
  CHECK(half.mismatch < 1e-12);

  const CoprimeResolution zero = resolve_coprime(gen(0.0, 4, 3), gen(0.0, 7, 3));
  CHECK(std::abs(zero.u) < 1e-12);
  CHECK_FALSE(zero.flagged);
}

TEST_CASE("resolve_coprime: random cosines") {
  Rng rng(2);
  std::uniform_real_distribution<double> unif(-0.999, 0.999);
  const std::array<std::pair<int, int>, 3> pitches{{{4, 7}, {2, 3}, {5, 7}}};
  for (const auto& [pa, pb] : pitches) {
    for (int trial = 0; trial < 200; ++trial) {
      const double u = unif(rng);
      const CoprimeResolution res = resolve_coprime(gen(u, pa, 3), gen(u, pb, 2));
      CHECK(std::abs(res.u - u) < 1e-12);
      CHECK_FALSE(res.flagged);
    }
  }
}

TEST_CASE("resolve_coprime: arbitrary generator pairs") {
  Rng rng(5);
  for (int trial = 0; trial < 500; ++trial) {
    const GeneratorEstimate ga{random_unit(rng), 4, 3}, gb{random_unit(rng), 7, 3};
    const CoprimeResolution res = resolve_coprime(ga, gb);
    CHECK(res.u >= -1.0);
    CHECK(res.u <= 1.0);
    CHECK(std::isfinite(res.mismatch));
    CHECK(res.flagged == (res.mismatch > 2.0 / 28.0));
  }
  CHECK_THROWS_AS(resolve_coprime(gen(0.1, 2, 1), gen(0.1, 4, 1)), std::invalid_argument);
}

TEST_CASE("doas_from_factors: broadside") {
  const ReceiveArrayLayout l = build_receive_layout({4, 7, 4, 4}, {4, 7, 4, 4}, Vec3::Zero());
  const CMatrix a = CMatrix::Ones(static_cast<Eigen::Index>(l.size()), 1);
  const auto doas = doas_from_factors(a, l, 2);
  REQUIRE(doas.size() == 1);
  CHECK((doas[0].direction.vec() - Vec3::UnitZ()).norm() < 1e-12);
  CHECK(doas[0].array_index == 2);
  CHECK(doas[0].target_index == 0);
  CHECK_FALSE(doas[0].flagged);
}

TEST_CASE("doas_from_factors: round trip") {
  Rng rng(3);
  const std::array<ReceiveArrayLayout, 3> layouts{
      build_receive_layout({4, 7, 4, 4}, {4, 7, 4, 4}, Vec3::Zero()),
      build_receive_layout({2, 3, 3, 2}, {3, 5, 5, 3}, Vec3::Zero()),
      build_receive_layout({4, 7, 4, 4}, {1, 2, 2, 1}, Vec3::Zero())};
  for (const ReceiveArrayLayout& l : layouts) {
    CMatrix a(static_cast<Eigen::Index>(l.size()), 40);
    std::vector<Vec3> truth;
    for (Eigen::Index r = 0; r < a.cols(); ++r) {
      truth.push_back(random_upper_direction(rng, 0.05));
      // Arbitrary column scaling must not matter.
      a.col(r) = complex_gaussian(rng) * steering_vector(l, Direction(truth.back()));
    }
    const auto doas = doas_from_factors(a, l);
    REQUIRE(doas.size() == 40);
    for (std::size_t r = 0; r < 40; ++r) {
      CHECK((doas[r].direction.vec() - truth[r]).norm() < 1e-9);
      CHECK(doas[r].u == doctest::Approx(truth[r].x()).epsilon(1e-9));
      CHECK(doas[r].w == doctest::Approx(truth[r].y()).epsilon(1e-9));
      CHECK(doas[r].target_index == r);
      CHECK_FALSE(doas[r].flagged);
    }
  }
}

TEST_CASE("doas_from_factors: noisy output stays valid") {
  Rng rng(4);
  const ReceiveArrayLayout l = build_receive_layout({4, 7, 4, 4}, {4, 7, 4, 4}, Vec3::Zero());
  const CMatrix a = random_cmatrix(static_cast<Eigen::Index>(l.size()), 100, rng);
  for (const DoaEstimate& d : doas_from_factors(a, l)) {
    CHECK(std::abs(d.direction.vec().norm() - 1.0) < 1e-12);
    CHECK(d.direction.vec().z() >= 0.0);
    CHECK(std::abs(d.u) <= 1.0);
    CHECK(std::abs(d.w) <= 1.0);
  }
  CHECK_THROWS_AS(doas_from_factors(CMatrix::Ones(3, 1), l), std::invalid_argument);
}
