#pragma once

#include <numbers>

namespace pat {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Detection arc S on the unit circle, counter-clockwise from `start` to
/// `end` (radians). The full circle is encoded as [0, 2*pi].
struct Arc {
  double start = 0.0;
  double end = kTwoPi;

  static Arc full() { return {0.0, kTwoPi}; }
  /// Lower half circle, angles in [pi, 2*pi).
  static Arc lower_half() { return {std::numbers::pi, kTwoPi}; }

  bool is_full() const;
  double length() const;
  /// Half-open membership test: angle in [start, end) modulo 2*pi.
  bool contains(double angle) const;
  /// Counter-clockwise offset of `angle` from `start`, in [0, 2*pi).
  double offset(double angle) const;
  /// Euclidean distance from a point to the arc.
  double distance(double px, double py) const;

  bool operator==(const Arc&) const = default;
};

/// Wraps an angle into [0, 2*pi).
double wrap_angle(double a);

}  // namespace pat
