#include "ccpd/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace ccpd {

void CoprimeAxisSpec::validate() const {
  if (pitch_a < 1 || pitch_b < 1 || len_a < 1 || len_b < 1) {
    throw std::invalid_argument("coprime axis: pitches and lengths must be positive");
  }
  if (std::gcd(pitch_a, pitch_b) != 1) {
    throw std::invalid_argument("coprime axis: pitches " + std::to_string(pitch_a) + " and " +
                                std::to_string(pitch_b) + " are not coprime");
  }
  if (len_a > pitch_b || len_b > pitch_a) {
    throw std::invalid_argument("coprime axis: require len_a <= pitch_b and len_b <= pitch_a");
  }
}

std::vector<int> build_axis_set(const CoprimeAxisSpec& spec) {
  spec.validate();
  std::vector<int> out;
  out.reserve(spec.size() + 1);
  for (int m = 0; m < spec.len_a; ++m) out.push_back(spec.pitch_a * m);
  for (int n = 0; n < spec.len_b; ++n) out.push_back(spec.pitch_b * n);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

Direction::Direction(const Vec3& v) : v_(v) {
  if (!(std::abs(v.norm() - 1.0) <= 1e-12)) {
    throw std::invalid_argument("direction must be unit norm");
  }
}

Direction Direction::normalized(const Vec3& v) {
  const double n = v.norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw std::invalid_argument("cannot normalize zero vector");
  return Direction(v / n);
}

Vec3 ReceiveArrayLayout::position(std::size_t i) const {
  const GridPoint& g = elements.at(i);
  return center + spacing() * Vec3(g.x, g.y, g.z);
}

std::array<SubarrayView, 4> ReceiveArrayLayout::subarrays() const {
  return {SubarrayView{Axis::x, 1, axis_x.pitch_a, &index_sets.x1},
          SubarrayView{Axis::x, 2, axis_x.pitch_b, &index_sets.x2},
          SubarrayView{Axis::y, 1, axis_y.pitch_a, &index_sets.y1},
          SubarrayView{Axis::y, 2, axis_y.pitch_b, &index_sets.y2}};
}

namespace {

std::vector<std::size_t> indices_where(const std::vector<GridPoint>& elements, auto&& pred) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < elements.size(); ++i) {
    if (pred(elements[i])) out.push_back(i);
  }
  return out;
}

}  // namespace

ReceiveArrayLayout build_receive_layout(const CoprimeAxisSpec& axis_x,
                                        const CoprimeAxisSpec& axis_y,
                                        const Vec3& center, double wavelength) {
  if (!(wavelength > 0.0)) throw std::invalid_argument("wavelength must be positive");
  const std::vector<int> sx = build_axis_set(axis_x);
  const std::vector<int> sy = build_axis_set(axis_y);

  ReceiveArrayLayout layout;
  layout.axis_x = axis_x;
  layout.axis_y = axis_y;
  layout.center = center;
  layout.wavelength = wavelength;

  for (int x : sx) layout.elements.push_back({x, 0, 0});
  for (int y : sy) {
    if (y != 0) layout.elements.push_back({0, y, 0});
  }
  std::sort(layout.elements.begin(), layout.elements.end(),
            [](const GridPoint& a, const GridPoint& b) {
              return a.y != b.y ? a.y < b.y : a.x < b.x;
            });

  const auto on_x = [](const GridPoint& g) { return g.y == 0; };
  const auto on_y = [](const GridPoint& g) { return g.x == 0; };
  const auto multiple = [](int coord, int pitch, int len) {
    return coord % pitch == 0 && coord / pitch < len;
  };

  IndexSets& q = layout.index_sets;
  q.x = indices_where(layout.elements, on_x);
  q.y = indices_where(layout.elements, on_y);
  q.x1 = indices_where(layout.elements, [&](const GridPoint& g) {
    return on_x(g) && multiple(g.x, axis_x.pitch_a, axis_x.len_a);
  });
  q.x2 = indices_where(layout.elements, [&](const GridPoint& g) {
    return on_x(g) && multiple(g.x, axis_x.pitch_b, axis_x.len_b);
  });
  q.y1 = indices_where(layout.elements, [&](const GridPoint& g) {
    return on_y(g) && multiple(g.y, axis_y.pitch_a, axis_y.len_a);
  });
  q.y2 = indices_where(layout.elements, [&](const GridPoint& g) {
    return on_y(g) && multiple(g.y, axis_y.pitch_b, axis_y.len_b);
  });

  const auto origin = std::find(layout.elements.begin(), layout.elements.end(), GridPoint{});
  layout.origin_index = static_cast<std::size_t>(origin - layout.elements.begin());
  return layout;
}

TransmitArrayLayout build_transmit_layout(int rows, int cols, const Vec3& center,
                                          double wavelength) {
  if (rows < 1 || cols < 1) throw std::invalid_argument("transmit grid must be nonempty");
  if (!(wavelength > 0.0)) throw std::invalid_argument("wavelength must be positive");
  TransmitArrayLayout layout;
  layout.rows = rows;
  layout.cols = cols;
  layout.center = center;
  layout.wavelength = wavelength;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) layout.elements.push_back({c, r, 0});
  }
  return layout;
}

namespace {

CVector grid_steering(const std::vector<GridPoint>& elements, double spacing, double wavelength,
                      const Direction& dir) {
  const Vec3& v = dir.vec();
  const double k = 2.0 * kPi / wavelength * spacing;
  CVector a(static_cast<Eigen::Index>(elements.size()));
  for (std::size_t i = 0; i < elements.size(); ++i) {
    const GridPoint& g = elements[i];
    const double phase = k * (g.x * v.x() + g.y * v.y() + g.z * v.z());
    a[static_cast<Eigen::Index>(i)] = std::polar(1.0, phase);
  }
  return a;
}

}  // namespace

CVector steering_vector(const ReceiveArrayLayout& layout, const Direction& dir) {
  return grid_steering(layout.elements, layout.spacing(), layout.wavelength, dir);
}

CVector steering_vector(const TransmitArrayLayout& layout, const Direction& dir) {
  return grid_steering(layout.elements, layout.spacing(), layout.wavelength, dir);
}

Direction direction_between(const Vec3& from, const Vec3& to) {
  const Vec3 d = to - from;
  if (d.norm() == 0.0) throw std::invalid_argument("direction_between: coincident points");
  return Direction::normalized(d);
}

}  // namespace ccpd
