#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <set>

#include "ccpd/localization.hpp"
#include "test_support.hpp"

using namespace ccpd;
using namespace ccpd::testing;

namespace {

BearingLine line_to(const Vec3& anchor, const Vec3& target) {
  return {anchor, direction_between(anchor, target)};
}

double objective(std::span<const BearingLine> lines, const Vec3& x) {
  double s = 0.0;
  for (const BearingLine& l : lines) s += line_distance_sq(l, x);
  return s;
}

/// Independent line-distance formula: |(x - p) x v|^2.
double cross_distance_sq(const BearingLine& l, const Vec3& x) {
  return (x - l.anchor).cross(l.direction.vec()).squaredNorm();
}

DoaEstimate doa_of(const Vec3& center, const Vec3& target, std::size_t m, std::size_t r) {
  const Direction d = direction_between(center, target);
  return {d, d.u(), d.w(), m, r, false};
}

}  // namespace

TEST_CASE("fuse_lines: exact intersection") {
  const Vec3 p(1, 2, 3);
  const std::vector<BearingLine> lines{line_to(Vec3(0, 0, 0), p), line_to(Vec3(5, 0, 0), p),
                                       line_to(Vec3(0, 7, -1), p)};
  const LocalizationResult r = fuse_lines(lines);
  CHECK((r.position - p).norm() < 1e-12);
  CHECK(r.residual < 1e-20);
  CHECK(r.lines_used == 3);
}

TEST_CASE("fuse_lines: skew pair") {
  const std::vector<BearingLine> lines{{Vec3(0, 0, 0), Direction(Vec3(1, 0, 0))},
                                       {Vec3(0, 1, 0), Direction(Vec3(0, 0, 1))}};
  const LocalizationResult r = fuse_lines(lines);
  CHECK((r.position - Vec3(0, 0.5, 0)).norm() < 1e-12);
  CHECK(r.residual == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("fuse_lines: grid search oracle") {
  Rng rng(1);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<BearingLine> lines;
    for (int i = 0; i < 4; ++i)
      lines.push_back({Vec3(n(rng), n(rng), n(rng)), Direction::normalized(Vec3(n(rng), n(rng), n(rng)))});
    const LocalizationResult r = fuse_lines(lines);
    // Coarse-to-fine search around the origin for the objective minimum.
    Vec3 best = Vec3::Zero();
    double step = 2.0;
    for (int level = 0; level < 14; ++level) {
      Vec3 centre = best;
      double f = objective(lines, best);
      for (int i = -10; i <= 10; ++i)
        for (int j = -10; j <= 10; ++j)
          for (int k = -10; k <= 10; ++k) {
            const Vec3 x = centre + step * Vec3(i, j, k);
            const double fx = objective(lines, x);
            if (fx < f) f = fx, best = x;
          }
      step /= 4.0;
    }
    CHECK((r.position - best).norm() < 2e-3);
    CHECK(r.residual <= objective(lines, best) + 1e-12);
    for (const BearingLine& l : lines)
      CHECK(line_distance_sq(l, best) == doctest::Approx(cross_distance_sq(l, best)).epsilon(1e-9));
  }
}

TEST_CASE("fuse_lines: gradient vanishes at the solution") {
  Rng rng(2);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<BearingLine> lines;
  for (int i = 0; i < 5; ++i)
    lines.push_back({Vec3(n(rng), n(rng), n(rng)), Direction::normalized(Vec3(n(rng), n(rng), n(rng)))});
  const Vec3 x = fuse_lines(lines).position;
  const double h = 1e-5;
  for (int c = 0; c < 3; ++c) {
    Vec3 e = Vec3::Zero();
    e[c] = h;
    const double g = (objective(lines, x + e) - objective(lines, x - e)) / (2 * h);
    CHECK(std::abs(g) < 1e-6);
  }
}

TEST_CASE("fuse_lines: translation and order") {
  Rng rng(3);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<BearingLine> lines;
  for (int i = 0; i < 4; ++i)
    lines.push_back({Vec3(n(rng), n(rng), n(rng)), Direction::normalized(Vec3(n(rng), n(rng), n(rng)))});
  const LocalizationResult base = fuse_lines(lines);
  const Vec3 shift(1000, -250, 40);
  auto moved = lines;
  for (BearingLine& l : moved) l.anchor += shift;
  CHECK((fuse_lines(moved).position - (base.position + shift)).norm() < 1e-9);
  auto reversed = lines;
  std::reverse(reversed.begin(), reversed.end());
  CHECK((fuse_lines(reversed).position - base.position).norm() < 1e-12);
}

TEST_CASE("fuse_lines: errors") {
  const std::vector<BearingLine> parallel{{Vec3(0, 0, 0), Direction(Vec3(0, 0, 1))},
                                          {Vec3(1, 0, 0), Direction(Vec3(0, 0, 1))}};
  CHECK_THROWS_AS(fuse_lines(parallel), std::domain_error);
  const std::vector<BearingLine> single{{Vec3(0, 0, 0), Direction(Vec3(0, 0, 1))}};
  CHECK_THROWS_AS(fuse_lines(single), std::invalid_argument);
}

TEST_CASE("localize_all") {
  const std::vector<Vec3> centers{Vec3(-8000, 8000, 0), Vec3(0, 8000, 0), Vec3(8000, 8000, 0)};
  const std::vector<Vec3> targets{Vec3(100, -2000, 5000), Vec3(-3000, 1000, 7000), Vec3(6000, 6000, 4500)};
  std::vector<std::vector<DoaEstimate>> doas(3);
  for (std::size_t m = 0; m < 3; ++m)
    for (std::size_t r = 0; r < 3; ++r) doas[m].push_back(doa_of(centers[m], targets[r], m, r));
  const auto out = localize_all(doas, centers);
  REQUIRE(out.size() == 3);
  for (std::size_t r = 0; r < 3; ++r) {
    CHECK((out[r].position - targets[r]).norm() < 1e-6);
    CHECK(out[r].lines_used == 3);
  }

  std::vector<std::vector<DoaEstimate>> empty(3);
  CHECK(localize_all(empty, centers).empty());
}

TEST_CASE("match_targets") {
  const std::vector<Vec3> truth{Vec3(0, 0, 0), Vec3(10, 0, 0), Vec3(0, 10, 0)};
  const Matching id = match_targets(truth, truth);
  CHECK(id.truth_of == std::vector<std::size_t>{0, 1, 2});
  CHECK(id.total_sq == 0.0);

  const std::vector<Vec3> swapped{Vec3(10, 0, 1), Vec3(0, 0, 1), Vec3(0, 10, 1)};
  const Matching sw = match_targets(swapped, truth);
  CHECK(sw.truth_of == std::vector<std::size_t>{1, 0, 2});
  CHECK(sw.total_sq == doctest::Approx(3.0));
  for (double e : sw.errors) CHECK(e == doctest::Approx(1.0));
}

TEST_CASE("solve_assignment: brute force over permutations") {
  Rng rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::MatrixXd cost(5, 5);
    for (Eigen::Index i = 0; i < cost.size(); ++i) cost.data()[i] = u(rng);
    std::vector<std::size_t> perm{0, 1, 2, 3, 4};
    double best = 1e9;
    do {
      double c = 0.0;
      for (std::size_t i = 0; i < 5; ++i) c += cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(perm[i]));
      best = std::min(best, c);
    } while (std::next_permutation(perm.begin(), perm.end()));
    const auto a = solve_assignment(cost);
    double got = 0.0;
    for (std::size_t i = 0; i < 5; ++i) got += cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(a[i]));
    CHECK(got == doctest::Approx(best).epsilon(1e-12));
    CHECK(std::set<std::size_t>(a.begin(), a.end()).size() == 5);
  }
}
