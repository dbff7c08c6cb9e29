#include "pat/omega.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <stdexcept>

namespace pat {

OmegaDomain::OmegaDomain(const MediumField& medium) : grid_(medium.grid()) {
  const Grid2D& g = grid_;
  std::vector<std::int64_t> slot(g.size(), -1);
  for (std::size_t j = 0; j < g.ny; ++j)
    for (std::size_t i = 0; i < g.nx; ++i)
      if (g.in_omega(i, j)) {
        slot[g.index(i, j)] = static_cast<std::int64_t>(interior_.size());
        interior_.push_back(g.index(i, j));
      }
  const std::size_t n_int = interior_.size();
  for (std::size_t c = 0; c < n_int; ++c) {
    const std::size_t n = interior_[c];
    for (std::size_t m : {n - 1, n + 1, n - g.nx, n + g.nx}) {
      if (slot[m] < 0) {
        slot[m] = static_cast<std::int64_t>(n_int + ring_.size());
        ring_.push_back(m);
      }
    }
  }
  nbr_.resize(n_int);
  wface_.resize(n_int);
  kappa_.resize(n_int);
  const auto& irx = medium.inv_rho_x();
  const auto& iry = medium.inv_rho_y();
  const std::size_t nxf = g.nx - 1;
  for (std::size_t c = 0; c < n_int; ++c) {
    const std::size_t n = interior_[c];
    const std::size_t i = n % g.nx;
    const std::size_t j = n / g.nx;
    nbr_[c] = {static_cast<std::uint32_t>(slot[n - 1]), static_cast<std::uint32_t>(slot[n + 1]),
               static_cast<std::uint32_t>(slot[n - g.nx]), static_cast<std::uint32_t>(slot[n + g.nx])};
    wface_[c] = {irx[j * nxf + i - 1], irx[j * nxf + i], iry[(j - 1) * g.nx + i], iry[j * g.nx + i]};
    kappa_[c] = medium.kappa()[n];
  }
}

void OmegaDomain::apply_stiffness(std::span<const double> combined, std::span<double> out) const {
  const std::size_t n_int = interior_.size();
#pragma omp parallel for schedule(static)
  for (std::size_t c = 0; c < n_int; ++c) {
    const auto& nb = nbr_[c];
    const auto& w = wface_[c];
    const double u = combined[c];
    out[c] = w[0] * (u - combined[nb[0]]) + w[1] * (u - combined[nb[1]]) + w[2] * (u - combined[nb[2]]) +
             w[3] * (u - combined[nb[3]]);
  }
}

std::vector<double> OmegaDomain::gather_interior(const Field& f) const {
  require_same_grid(f.grid(), grid_, "omega gather");
  std::vector<double> out(interior_.size());
  for (std::size_t c = 0; c < interior_.size(); ++c) out[c] = f[interior_[c]];
  return out;
}

Field OmegaDomain::scatter_interior(std::span<const double> interior) const {
  Field out(grid_);
  for (std::size_t c = 0; c < interior_.size(); ++c) out[interior_[c]] = interior[c];
  return out;
}

RingInterpolator::RingInterpolator(const OmegaDomain& domain, const std::vector<double>& angles) {
  if (angles.empty()) throw std::invalid_argument("ring interpolator: no detector angles");
  const Grid2D& g = domain.grid();
  const std::size_t nd = angles.size();
  entries_.reserve(domain.ring_count());
  for (std::size_t n : domain.ring_nodes()) {
    const double theta = wrap_angle(std::atan2(g.y(n / g.nx), g.x(n % g.nx)));
    // First detector with angle > theta (cyclic successor).
    const auto it = std::upper_bound(angles.begin(), angles.end(), theta);
    const std::size_t d1 = it == angles.end() ? 0 : static_cast<std::size_t>(it - angles.begin());
    const std::size_t d0 = (d1 + nd - 1) % nd;
    double a0 = angles[d0];
    double a1 = angles[d1];
    double t = theta;
    if (a1 <= a0) a1 += kTwoPi;
    if (t < a0) t += kTwoPi;
    const double span = a1 - a0;
    const double w1 = span > 0.0 ? std::clamp((t - a0) / span, 0.0, 1.0) : 0.0;
    entries_.push_back({d0, d1, w1});
  }
}

void RingInterpolator::interpolate(std::span<const double> values, std::span<double> ring_out) const {
  for (std::size_t r = 0; r < entries_.size(); ++r) {
    const Entry& e = entries_[r];
    ring_out[r] = (1.0 - e.w1) * values[e.d0] + e.w1 * values[e.d1];
  }
}

void RingInterpolator::interpolate_column(std::span<const double> samples, std::size_t n_t, std::size_t k,
                                          std::span<double> ring_out) const {
  for (std::size_t r = 0; r < entries_.size(); ++r) {
    const Entry& e = entries_[r];
    ring_out[r] = (1.0 - e.w1) * samples[e.d0 * n_t + k] + e.w1 * samples[e.d1 * n_t + k];
  }
}

CgResult conjugate_gradient(const std::function<void(std::span<const double>, std::span<double>)>& apply,
                            std::span<const double> rhs, std::span<double> x, std::span<const double> inv_diag,
                            double tolerance, std::size_t max_iters) {
  const std::size_t n = rhs.size();
  auto dot = [n](std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) s += a[k] * b[k];
    return s;
  };
  CgResult res;
  const double bnorm = std::sqrt(dot(rhs, rhs));
  if (bnorm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    res.converged = true;
    return res;
  }
  std::vector<double> r(n), z(n), p(n), ap(n);
  apply(x, ap);
  for (std::size_t k = 0; k < n; ++k) r[k] = rhs[k] - ap[k];
  auto precondition = [&] {
    if (inv_diag.empty()) {
      std::copy(r.begin(), r.end(), z.begin());
    } else {
      for (std::size_t k = 0; k < n; ++k) z[k] = inv_diag[k] * r[k];
    }
  };
  double rnorm = std::sqrt(dot(r, r));
  res.relative_residual = rnorm / bnorm;
  res.history.push_back(res.relative_residual);
  if (res.relative_residual <= tolerance) {
    res.converged = true;
    return res;
  }
  precondition();
  std::copy(z.begin(), z.end(), p.begin());
  double rz = dot(r, z);
  for (std::size_t it = 1; it <= max_iters; ++it) {
    apply(p, ap);
    const double pap = dot(p, ap);
    if (!(pap > 0.0)) break;
    const double alpha = rz / pap;
    for (std::size_t k = 0; k < n; ++k) {
      x[k] += alpha * p[k];
      r[k] -= alpha * ap[k];
    }
    rnorm = std::sqrt(dot(r, r));
    res.iterations = it;
    res.relative_residual = rnorm / bnorm;
    res.history.push_back(res.relative_residual);
    if (res.relative_residual <= tolerance) {
      res.converged = true;
      break;
    }
    precondition();
    const double rz_new = dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t k = 0; k < n; ++k) p[k] = z[k] + beta * p[k];
  }
  return res;
}

void write_residual_csv(const std::string& path, const CgResult& result) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << "iteration,relative_residual\n" << std::setprecision(17);
  for (std::size_t k = 0; k < result.history.size(); ++k) out << k << "," << result.history[k] << "\n";
}

}  // namespace pat
