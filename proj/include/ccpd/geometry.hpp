#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "ccpd/types.hpp"

namespace ccpd {

/// One axis of a coprime L-shaped array: two uniform subarrays sharing the
/// origin element, with pitches `pitch_a` and `pitch_b` (in half-wavelength
/// units) and `len_a`, `len_b` elements respectively.
struct CoprimeAxisSpec {
  int pitch_a = 1;
  int pitch_b = 1;
  int len_a = 1;
  int len_b = 1;

  /// Throws std::invalid_argument on non-coprime pitches or length bounds
  /// (len_a <= pitch_b, len_b <= pitch_a).
  void validate() const;
  std::size_t size() const { return static_cast<std::size_t>(len_a + len_b - 1); }

  friend bool operator==(const CoprimeAxisSpec&, const CoprimeAxisSpec&) = default;
};

/// Sorted integer grid coordinates of the axis elements.
std::vector<int> build_axis_set(const CoprimeAxisSpec& spec);

struct GridPoint {
  int x = 0;
  int y = 0;
  int z = 0;

  friend bool operator==(const GridPoint&, const GridPoint&) = default;
};

enum class Axis { x, y };

/// Element indices (0-based, into ReceiveArrayLayout::elements) of the axis
/// and subarray groups. Each list is strictly increasing and ordered by
/// increasing grid coordinate along its axis.
struct IndexSets {
  std::vector<std::size_t> x, y;
  std::vector<std::size_t> x1, x2, y1, y2;
};

/// One uniform linear subarray viewed through the index sets.
struct SubarrayView {
  Axis axis;
  int part;   // 1 or 2
  int pitch;  // grid pitch
  const std::vector<std::size_t>* indices;
};

class Direction {
 public:
  /// Throws std::invalid_argument unless |v| = 1 within 1e-12.
  explicit Direction(const Vec3& v);
  static Direction normalized(const Vec3& v);

  const Vec3& vec() const { return v_; }
  double u() const { return v_.x(); }
  double w() const { return v_.y(); }

 private:
  Vec3 v_;
};

struct ReceiveArrayLayout {
  CoprimeAxisSpec axis_x;
  CoprimeAxisSpec axis_y;
  Vec3 center = Vec3::Zero();
  double wavelength = 1.0;
  std::vector<GridPoint> elements;
  IndexSets index_sets;
  std::size_t origin_index = 0;

  std::size_t size() const { return elements.size(); }
  double spacing() const { return wavelength / 2.0; }
  Vec3 position(std::size_t i) const;
  /// Subarrays in the fixed order x1, x2, y1, y2.
  std::array<SubarrayView, 4> subarrays() const;
};

struct TransmitArrayLayout {
  int rows = 1;
  int cols = 1;
  Vec3 center = Vec3::Zero();
  double wavelength = 1.0;
  std::vector<GridPoint> elements;

  std::size_t size() const { return elements.size(); }
  double spacing() const { return wavelength / 2.0; }
};

ReceiveArrayLayout build_receive_layout(const CoprimeAxisSpec& axis_x,
                                        const CoprimeAxisSpec& axis_y,
                                        const Vec3& center, double wavelength = 1.0);

TransmitArrayLayout build_transmit_layout(int rows, int cols, const Vec3& center,
                                          double wavelength = 1.0);

/// exp(i 2 pi / lambda <p_i - center, v>) for every element.
CVector steering_vector(const ReceiveArrayLayout& layout, const Direction& dir);
CVector steering_vector(const TransmitArrayLayout& layout, const Direction& dir);

/// Unit vector from `from` to `to`; throws on coincident points.
Direction direction_between(const Vec3& from, const Vec3& to);

}  // namespace ccpd
