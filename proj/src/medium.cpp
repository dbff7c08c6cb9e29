#include "pat/medium.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace pat {

MediumField::MediumField(Field kappa, Field rho) : kappa_(std::move(kappa)), rho_(std::move(rho)) {}

MediumField MediumField::from_fields(Field kappa, Field rho) {
  require_same_grid(kappa.grid(), rho.grid(), "medium");
  const Grid2D& g = kappa.grid();
  g.validate();
  for (std::size_t j = 0; j < g.ny; ++j) {
    for (std::size_t i = 0; i < g.nx; ++i) {
      const double k = kappa(i, j);
      const double r = rho(i, j);
      if (!(k > 0.0) || !(r > 0.0) || !std::isfinite(k) || !std::isfinite(r)) {
        std::ostringstream msg;
        msg << "medium: non-positive or non-finite value at node (" << i << "," << j << "): kappa=" << k
            << " rho=" << r;
        throw std::invalid_argument(msg.str());
      }
      if (!g.in_omega(i, j) && std::abs(k * r - 1.0) > 1e-12) {
        std::ostringstream msg;
        msg << "medium: kappa*rho = " << k * r << " != 1 outside the unit disk at node (" << i << "," << j << ")";
        throw std::invalid_argument(msg.str());
      }
    }
  }
  MediumField m(std::move(kappa), std::move(rho));
  m.kappa_min_ = m.kappa_.min();
  m.kappa_max_ = m.kappa_.max();
  m.rho_min_ = m.rho_.min();
  m.rho_max_ = m.rho_.max();
  m.c_max_ = 1.0 / std::sqrt(m.kappa_min_ * m.rho_min_);

  m.inv_rho_x_.assign((g.nx - 1) * g.ny, 0.0);
  m.inv_rho_y_.assign(g.nx * (g.ny - 1), 0.0);
  const Field& r = m.rho_;
  for (std::size_t j = 0; j < g.ny; ++j)
    for (std::size_t i = 0; i + 1 < g.nx; ++i) m.inv_rho_x_[j * (g.nx - 1) + i] = 2.0 / (r(i, j) + r(i + 1, j));
  for (std::size_t j = 0; j + 1 < g.ny; ++j)
    for (std::size_t i = 0; i < g.nx; ++i) m.inv_rho_y_[j * g.nx + i] = 2.0 / (r(i, j) + r(i, j + 1));
  return m;
}

Field MediumField::slowness() const {
  Field s(grid());
  for (std::size_t n = 0; n < s.size(); ++n) s[n] = std::sqrt(kappa_[n] * rho_[n]);
  return s;
}

MediumField MediumField::product_in_kappa() const {
  Field k(grid());
  for (std::size_t n = 0; n < k.size(); ++n) k[n] = kappa_[n] * rho_[n];
  return from_fields(std::move(k), Field(grid(), 1.0));
}

MediumField MediumField::product_in_rho() const {
  Field r(grid());
  for (std::size_t n = 0; n < r.size(); ++n) r[n] = kappa_[n] * rho_[n];
  return from_fields(Field(grid(), 1.0), std::move(r));
}

MediumField MediumField::resampled(const Grid2D& target) const {
  Field k = resample(kappa_, target);
  Field r = resample(rho_, target);
  for (std::size_t j = 0; j < target.ny; ++j) {
    for (std::size_t i = 0; i < target.nx; ++i) {
      if (!target.in_omega(i, j)) {
        k(i, j) = 1.0;
        r(i, j) = 1.0;
      }
    }
  }
  return from_fields(std::move(k), std::move(r));
}

InitialPressure InitialPressure::from_field(Field values, double margin) {
  const Grid2D& g = values.grid();
  double support = 0.0;
  for (std::size_t j = 0; j < g.ny; ++j) {
    for (std::size_t i = 0; i < g.nx; ++i) {
      const double v = values(i, j);
      if (!std::isfinite(v)) throw std::invalid_argument("initial pressure: non-finite value");
      if (v == 0.0) continue;
      const double r = std::hypot(g.x(i), g.y(j));
      if (r >= 1.0 - margin) {
        std::ostringstream msg;
        msg << "initial pressure: support reaches |x| = " << r << " >= " << 1.0 - margin
            << " (must stay inside the unit disk with margin " << margin << ")";
        throw std::invalid_argument(msg.str());
      }
      support = std::max(support, r);
    }
  }
  return InitialPressure{std::move(values), support};
}

namespace {

// Sum over x and y faces of w_face * du * dv (differences, not divided by dx).
double face_sum(const Field& u, const Field& v, const std::vector<double>* wx, const std::vector<double>* wy) {
  const Grid2D& g = u.grid();
  double s = 0.0;
  for (std::size_t j = 0; j < g.ny; ++j) {
    for (std::size_t i = 0; i + 1 < g.nx; ++i) {
      const double w = wx ? (*wx)[j * (g.nx - 1) + i] : 1.0;
      s += w * (u(i + 1, j) - u(i, j)) * (v(i + 1, j) - v(i, j));
    }
  }
  for (std::size_t j = 0; j + 1 < g.ny; ++j) {
    for (std::size_t i = 0; i < g.nx; ++i) {
      const double w = wy ? (*wy)[j * g.nx + i] : 1.0;
      s += w * (u(i, j + 1) - u(i, j)) * (v(i, j + 1) - v(i, j));
    }
  }
  return s;
}

}  // namespace

double inner_product_H1kr(const Field& u, const Field& v, const MediumField& medium) {
  require_same_grid(u.grid(), v.grid(), "inner_product_H1kr");
  require_same_grid(u.grid(), medium.grid(), "inner_product_H1kr");
  const Grid2D& g = u.grid();
  double mass = 0.0;
  for (std::size_t n = 0; n < u.size(); ++n) mass += medium.kappa()[n] * u[n] * v[n];
  return mass * g.dx * g.dx + face_sum(u, v, &medium.inv_rho_x(), &medium.inv_rho_y());
}

double norm_H1kr(const Field& u, const MediumField& medium) { return std::sqrt(inner_product_H1kr(u, u, medium)); }

double inner_product_H1(const Field& u, const Field& v) {
  require_same_grid(u.grid(), v.grid(), "inner_product_H1");
  const Grid2D& g = u.grid();
  double mass = 0.0;
  for (std::size_t n = 0; n < u.size(); ++n) mass += u[n] * v[n];
  return mass * g.dx * g.dx + face_sum(u, v, nullptr, nullptr);
}

double norm_H1(const Field& u) { return std::sqrt(inner_product_H1(u, u)); }

double seminorm_rho(const Field& u, const MediumField& medium) {
  require_same_grid(u.grid(), medium.grid(), "seminorm_rho");
  return std::sqrt(std::max(0.0, face_sum(u, u, &medium.inv_rho_x(), &medium.inv_rho_y())));
}

}  // namespace pat
