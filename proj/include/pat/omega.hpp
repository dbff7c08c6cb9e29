#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "pat/grid.hpp"
#include "pat/medium.hpp"

namespace pat {

/// Compact indexing of the nodes strictly inside the unit disk plus the
/// ring of exterior nodes adjacent to them (the discrete boundary).
///
/// Combined vectors hold interior values first, then ring values.
class OmegaDomain {
 public:
  explicit OmegaDomain(const MediumField& medium);

  const Grid2D& grid() const { return grid_; }
  std::size_t interior_count() const { return interior_.size(); }
  std::size_t ring_count() const { return ring_.size(); }
  const std::vector<std::size_t>& interior_nodes() const { return interior_; }
  const std::vector<std::size_t>& ring_nodes() const { return ring_; }

  /// Neighbor slots (combined index) and face weights 1/rho of interior node c.
  const std::array<std::uint32_t, 4>& neighbors(std::size_t c) const { return nbr_[c]; }
  const std::array<double, 4>& face_weights(std::size_t c) const { return wface_[c]; }
  double kappa(std::size_t c) const { return kappa_[c]; }

  /// -div(rho^{-1} grad u) * dx^2 at interior nodes from combined values.
  void apply_stiffness(std::span<const double> combined, std::span<double> out) const;

  std::vector<double> gather_interior(const Field& f) const;
  Field scatter_interior(std::span<const double> interior) const;

 private:
  Grid2D grid_;
  std::vector<std::size_t> interior_;
  std::vector<std::size_t> ring_;
  std::vector<std::array<std::uint32_t, 4>> nbr_;
  std::vector<std::array<double, 4>> wface_;
  std::vector<double> kappa_;
};

/// Piecewise-linear interpolation in angle from detector values to ring
/// nodes (cyclic over the detector angles).
class RingInterpolator {
 public:
  RingInterpolator(const OmegaDomain& domain, const std::vector<double>& angles);

  /// values[d] for every detector -> one value per ring node.
  void interpolate(std::span<const double> detector_values, std::span<double> ring_out) const;
  /// Same, reading the column `k` of a detector-major array with row length n_t.
  void interpolate_column(std::span<const double> samples, std::size_t n_t, std::size_t k,
                          std::span<double> ring_out) const;

 private:
  struct Entry {
    std::size_t d0, d1;
    double w1;
  };
  std::vector<Entry> entries_;
};

struct CgResult {
  std::size_t iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
  std::vector<double> history;
};

/// Conjugate gradients for a symmetric positive definite operator.
/// `inv_diag`, when non-empty, is used as a Jacobi preconditioner.
/// The initial content of `x` is the starting guess.
CgResult conjugate_gradient(const std::function<void(std::span<const double>, std::span<double>)>& apply,
                            std::span<const double> rhs, std::span<double> x, std::span<const double> inv_diag,
                            double tolerance, std::size_t max_iters);

/// Writes one `iteration,relative_residual` row per CG step.
void write_residual_csv(const std::string& path, const CgResult& result);

}  // namespace pat
