#include "pat/arc.hpp"

#include <algorithm>
#include <cmath>

namespace pat {

double wrap_angle(double a) {
  double w = std::fmod(a, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  if (w >= kTwoPi) w = 0.0;
  return w;
}

bool Arc::is_full() const { return end - start >= kTwoPi - 1e-12; }

double Arc::length() const { return std::min(end - start, kTwoPi); }

double Arc::offset(double angle) const { return wrap_angle(angle - start); }

bool Arc::contains(double angle) const {
  if (is_full()) return true;
  return offset(angle) < length() - 1e-12;
}

double Arc::distance(double px, double py) const {
  const double r = std::hypot(px, py);
  if (r > 0.0 && contains(std::atan2(py, px))) return std::abs(r - 1.0);
  if (is_full()) return std::abs(r - 1.0);
  const double d0 = std::hypot(px - std::cos(start), py - std::sin(start));
  const double d1 = std::hypot(px - std::cos(end), py - std::sin(end));
  return std::min(d0, d1);
}

}  // namespace pat
