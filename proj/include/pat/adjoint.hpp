#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <vector>

#include "pat/medium.hpp"
#include "pat/omega.hpp"
#include "pat/wave.hpp"

namespace pat {

struct EllipticSettings {
  double tolerance = 1e-10;
  std::size_t max_iters = 20000;
  bool jacobi = true;
};

/// D_h = kappa - div_h(rho^{-1} grad_h) on the open-disk nodes with zero
/// Dirichlet values on the boundary ring, and the rho-weighted Laplace
/// problem with prescribed ring values.
class EllipticProblem {
 public:
  explicit EllipticProblem(const MediumField& medium, EllipticSettings settings = {});

  const OmegaDomain& domain() const { return *domain_; }
  const EllipticSettings& settings() const { return settings_; }

  /// D_h u for u supported in the disk.
  Field apply_D(const Field& u) const;
  /// Solves D_h u = psi; psi must vanish outside the disk. Throws
  /// NumericalError when max_iters is reached.
  Field solve_D(const Field& psi, CgResult* diagnostics = nullptr) const;

  /// Discrete harmonic extension of per-detector boundary values.
  Field harmonic_extension(const std::vector<double>& detector_values, const std::vector<double>& angles,
                           CgResult* diagnostics = nullptr) const;

 private:
  std::shared_ptr<const OmegaDomain> domain_;
  EllipticSettings settings_;
  std::vector<double> inv_diag_D_;
  std::vector<double> inv_diag_A_;
};

Field elliptic_solve_D(const Field& psi, const EllipticProblem& problem);

Field harmonic_extension(const std::vector<double>& detector_values, const std::vector<double>& angles,
                         const EllipticProblem& problem);

/// L2 adjoint of the discrete measurement operator.
Field adjoint_L2(const Sinogram& h, const WaveSolver& solver);
/// H1_{kappa,rho} adjoint: D_h^{-1} applied to the L2 adjoint.
Field adjoint_H1(const Sinogram& h, const WaveSolver& solver, const EllipticProblem& problem);

struct NormEstimate {
  double value = 0.0;
  std::size_t iterations = 0;
  bool converged = false;  // false: warning, last iterate returned
};

/// sqrt of the largest eigenvalue of L*L by power iteration in the
/// H1_{kappa,rho} geometry; deterministic for a given seed.
NormEstimate operator_norm_estimate(const WaveSolver& solver, const EllipticProblem& problem, std::size_t iters,
                                    std::uint64_t seed = 1);

/// White noise smoothed by `passes` sweeps of 5-point averaging, zero
/// outside the disk of radius 1 - margin.
Field random_smooth_field(const Grid2D& grid, std::uint64_t seed, int passes = 8, double margin = 0.05);

}  // namespace pat
