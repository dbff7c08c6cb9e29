#include "pat/adjoint.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace pat {

EllipticProblem::EllipticProblem(const MediumField& medium, EllipticSettings settings)
    : domain_(std::make_shared<const OmegaDomain>(medium)), settings_(settings) {
  if (!(settings_.tolerance > 0.0)) throw std::invalid_argument("elliptic tolerance must be positive");
  if (settings_.max_iters == 0) throw std::invalid_argument("elliptic max_iters must be positive");
  const OmegaDomain& d = *domain_;
  const double h2 = d.grid().dx * d.grid().dx;
  inv_diag_D_.resize(d.interior_count());
  inv_diag_A_.resize(d.interior_count());
  for (std::size_t c = 0; c < d.interior_count(); ++c) {
    const auto& w = d.face_weights(c);
    const double s = w[0] + w[1] + w[2] + w[3];
    inv_diag_A_[c] = 1.0 / s;
    inv_diag_D_[c] = 1.0 / (d.kappa(c) * h2 + s);
  }
}

namespace {

// dx^2 * D_h on interior values (ring values zero).
void apply_scaled_D(const OmegaDomain& d, std::span<const double> u, std::span<double> out,
                    std::vector<double>& combined) {
  const std::size_t n = d.interior_count();
  const double h2 = d.grid().dx * d.grid().dx;
  std::copy(u.begin(), u.end(), combined.begin());
  d.apply_stiffness(combined, out);
  for (std::size_t c = 0; c < n; ++c) out[c] += d.kappa(c) * h2 * u[c];
}

void require_disk_support(const Field& psi, const OmegaDomain& d) {
  const Grid2D& g = d.grid();
  for (std::size_t j = 0; j < g.ny; ++j)
    for (std::size_t i = 0; i < g.nx; ++i) {
      const double v = psi(i, j);
      if (!std::isfinite(v)) throw std::invalid_argument("elliptic solve: right-hand side is not finite");
      if (v != 0.0 && !g.in_omega(i, j))
        throw std::invalid_argument("elliptic solve: right-hand side is nonzero outside the disk");
    }
}

void check_converged(const CgResult& r, const char* what) {
  if (r.converged) return;
  std::ostringstream msg;
  msg << what << ": CG stopped after " << r.iterations << " iterations at relative residual "
      << r.relative_residual;
  throw NumericalError(msg.str());
}

}  // namespace

Field EllipticProblem::apply_D(const Field& u) const {
  const OmegaDomain& d = *domain_;
  require_same_grid(u.grid(), d.grid(), "apply_D");
  const std::vector<double> ui = d.gather_interior(u);
  std::vector<double> out(ui.size());
  std::vector<double> combined(d.interior_count() + d.ring_count(), 0.0);
  apply_scaled_D(d, ui, out, combined);
  const double inv_h2 = 1.0 / (d.grid().dx * d.grid().dx);
  for (double& v : out) v *= inv_h2;
  return d.scatter_interior(out);
}

Field EllipticProblem::solve_D(const Field& psi, CgResult* diagnostics) const {
  const OmegaDomain& d = *domain_;
  require_same_grid(psi.grid(), d.grid(), "solve_D");
  require_disk_support(psi, d);
  std::vector<double> rhs = d.gather_interior(psi);
  const double h2 = d.grid().dx * d.grid().dx;
  for (double& v : rhs) v *= h2;
  std::vector<double> x(rhs.size(), 0.0);
  std::vector<double> combined(d.interior_count() + d.ring_count(), 0.0);
  const CgResult r = conjugate_gradient(
      [&](std::span<const double> u, std::span<double> out) { apply_scaled_D(d, u, out, combined); }, rhs, x,
      settings_.jacobi ? std::span<const double>(inv_diag_D_) : std::span<const double>(), settings_.tolerance,
      settings_.max_iters);
  if (diagnostics) *diagnostics = r;
  check_converged(r, "elliptic_solve_D");
  return d.scatter_interior(x);
}

Field EllipticProblem::harmonic_extension(const std::vector<double>& detector_values,
                                          const std::vector<double>& angles, CgResult* diagnostics) const {
  if (detector_values.size() != angles.size())
    throw std::invalid_argument("harmonic_extension: value and angle counts differ");
  for (double v : detector_values)
    if (!std::isfinite(v)) throw std::invalid_argument("harmonic_extension: boundary values must be finite");
  const OmegaDomain& d = *domain_;
  const std::size_t n_int = d.interior_count();
  std::vector<double> ring(d.ring_count());
  RingInterpolator(d, angles).interpolate(detector_values, ring);

  // Right-hand side from the known ring values, summed in stencil order so
  // that a constant boundary gives an exactly consistent system.
  std::vector<double> rhs(n_int, 0.0);
  for (std::size_t c = 0; c < n_int; ++c) {
    const auto& nb = d.neighbors(c);
    const auto& w = d.face_weights(c);
    double s = 0.0;
    for (int k = 0; k < 4; ++k) s += nb[k] >= n_int ? w[k] * ring[nb[k] - n_int] : 0.0;
    rhs[c] = s;
  }
  double mean = 0.0;
  for (double v : ring) mean += v;
  mean = ring.empty() ? 0.0 : mean / static_cast<double>(ring.size());
  std::vector<double> x(n_int, mean);
  std::vector<double> combined(n_int + d.ring_count(), 0.0);
  const CgResult r = conjugate_gradient(
      [&](std::span<const double> u, std::span<double> out) {
        std::copy(u.begin(), u.end(), combined.begin());
        d.apply_stiffness(combined, out);
      },
      rhs, x, settings_.jacobi ? std::span<const double>(inv_diag_A_) : std::span<const double>(),
      settings_.tolerance, settings_.max_iters);
  if (diagnostics) *diagnostics = r;
  check_converged(r, "harmonic_extension");
  return d.scatter_interior(x);
}

Field elliptic_solve_D(const Field& psi, const EllipticProblem& problem) { return problem.solve_D(psi); }

Field harmonic_extension(const std::vector<double>& detector_values, const std::vector<double>& angles,
                         const EllipticProblem& problem) {
  return problem.harmonic_extension(detector_values, angles);
}

Field adjoint_L2(const Sinogram& h, const WaveSolver& solver) { return solver.adjoint_l2(h); }

Field adjoint_H1(const Sinogram& h, const WaveSolver& solver, const EllipticProblem& problem) {
  return problem.solve_D(solver.adjoint_l2(h));
}

NormEstimate operator_norm_estimate(const WaveSolver& solver, const EllipticProblem& problem, std::size_t iters,
                                    std::uint64_t seed) {
  if (iters < 5) throw std::invalid_argument("operator_norm_estimate: needs at least 5 iterations");
  const MediumField& medium = solver.medium();
  NormEstimate est;
  Field x = random_smooth_field(solver.grid(), seed);
  double nx = norm_H1kr(x, medium);
  if (nx == 0.0) return est;
  x *= 1.0 / nx;
  double lambda_prev = 0.0;
  for (std::size_t it = 1; it <= iters; ++it) {
    const Sinogram lx = solver.forward(x);
    const double lambda = inner_product_sigma(lx, lx);
    est.iterations = it;
    est.value = std::sqrt(lambda);
    if (lambda == 0.0) {
      est.converged = true;
      return est;
    }
    const double change = std::abs(lambda - lambda_prev) / lambda;
    est.converged = change <= 1e-3;
    if (change <= 1e-6) break;
    lambda_prev = lambda;
    Field y = problem.solve_D(solver.adjoint_l2(lx));
    const double ny = norm_H1kr(y, medium);
    if (ny == 0.0) break;
    x = std::move(y);
    x *= 1.0 / ny;
  }
  return est;
}

Field random_smooth_field(const Grid2D& grid, std::uint64_t seed, int passes, double margin) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  const double r2 = (1.0 - margin) * (1.0 - margin);
  auto inside = [&](std::size_t i, std::size_t j) {
    const double x = grid.x(i);
    const double y = grid.y(j);
    return x * x + y * y < r2;
  };
  Field u(grid);
  for (std::size_t j = 0; j < grid.ny; ++j)
    for (std::size_t i = 0; i < grid.nx; ++i) {
      const double v = dist(rng);
      if (inside(i, j)) u(i, j) = v;
    }
  Field tmp(grid);
  for (int p = 0; p < passes; ++p) {
    for (std::size_t j = 1; j + 1 < grid.ny; ++j)
      for (std::size_t i = 1; i + 1 < grid.nx; ++i)
        tmp(i, j) = inside(i, j) ? 0.125 * (4.0 * u(i, j) + u(i - 1, j) + u(i + 1, j) + u(i, j - 1) + u(i, j + 1))
                                 : 0.0;
    std::swap(u, tmp);
  }
  return u;
}

}  // namespace pat
