#pragma once

#include <cstdint>
#include <random>

#include "pat/grid.hpp"
#include "pat/medium.hpp"
#include "pat/wave.hpp"

namespace pat::testing {

// 12 x 12 and 32 x 32 node blocks spanning [-1, 1]^2.
inline Grid2D tiny_grid() { return Grid2D::spanning_unit_square(12, 4); }
inline Grid2D small_grid() { return Grid2D::spanning_unit_square(32, 6); }

inline MediumField fish_medium(const Grid2D& g) { return build_medium(PhantomSpec::builtin("fish"), g); }
inline MediumField smooth_medium(const Grid2D& g) { return build_medium(PhantomSpec::builtin("smooth"), g); }

inline Field random_omega_field(const Grid2D& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  Field f(g);
  for (std::size_t j = 0; j < g.ny; ++j)
    for (std::size_t i = 0; i < g.nx; ++i) {
      const double v = nd(rng);
      if (g.in_omega(i, j)) f(i, j) = v;
    }
  return f;
}

inline Sinogram random_sinogram(const DetectorArray& det, const TimeAxis& axis, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  Sinogram s = Sinogram::zeros(det, axis.n_t, axis.dt);
  for (std::size_t d = 0; d < s.n_det; ++d)
    for (std::size_t k = 0; k < s.n_t; ++k) {
      const double v = nd(rng);
      if (s.active(d)) s.at(d, k) = v;
    }
  return s;
}

inline double rel_diff(double a, double b) {
  const double s = std::max(std::abs(a), std::abs(b));
  return s == 0.0 ? 0.0 : std::abs(a - b) / s;
}

}  // namespace pat::testing
