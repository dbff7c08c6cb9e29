#include "pat/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace pat {

namespace {
constexpr std::size_t kExtraCells = 3;
}

Grid2D Grid2D::covering_unit_disk(double dx, std::size_t pml_width) {
  if (!(dx > 0.0) || !std::isfinite(dx)) throw std::invalid_argument("grid: dx must be positive");
  const auto k = static_cast<std::size_t>(std::ceil(1.0 / dx - 1e-9));
  const std::size_t half = k + pml_width + kExtraCells;
  Grid2D g;
  g.nx = g.ny = 2 * half + 1;
  g.dx = dx;
  g.origin_x = g.origin_y = -static_cast<double>(half) * dx;
  g.pml_width = pml_width;
  g.validate();
  return g;
}

Grid2D Grid2D::spanning_unit_square(std::size_t n_across, std::size_t pml_width) {
  if (n_across < 3) throw std::invalid_argument("grid: n_across must be >= 3");
  Grid2D g;
  g.dx = 2.0 / static_cast<double>(n_across - 1);
  const std::size_t pad = pml_width + kExtraCells;
  g.nx = g.ny = n_across + 2 * pad;
  g.origin_x = g.origin_y = -1.0 - static_cast<double>(pad) * g.dx;
  g.pml_width = pml_width;
  g.validate();
  return g;
}

bool Grid2D::in_omega(std::size_t i, std::size_t j) const {
  const double px = x(i);
  const double py = y(j);
  return px * px + py * py < 1.0 - 1e-12;
}

void Grid2D::validate() const {
  if (!(dx > 0.0) || !std::isfinite(dx)) throw std::invalid_argument("grid: dx must be positive");
  if (nx < 16 || ny < 16) throw std::invalid_argument("grid: nx, ny must be >= 16");
  // The unit circle must sit at least pml_width + 2 cells inside the boundary.
  const double need = static_cast<double>(pml_width + 2) * dx;
  const double lo_x = origin_x + need;
  const double hi_x = x(nx - 1) - need;
  const double lo_y = origin_y + need;
  const double hi_y = y(ny - 1) - need;
  const double eps = 1e-9 * dx;
  if (lo_x > -1.0 + eps || hi_x < 1.0 - eps || lo_y > -1.0 + eps || hi_y < 1.0 - eps) {
    throw std::invalid_argument("grid: unit circle must lie at least pml_width + 2 cells inside the boundary");
  }
}

Field::Field(const Grid2D& grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size()) {
    throw std::invalid_argument("field: value count " + std::to_string(values_.size()) +
                                " does not match grid size " + std::to_string(grid_.size()));
  }
}

double Field::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

double Field::min() const { return values_.empty() ? 0.0 : *std::min_element(values_.begin(), values_.end()); }
double Field::max() const { return values_.empty() ? 0.0 : *std::max_element(values_.begin(), values_.end()); }

bool Field::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

Field& Field::operator+=(const Field& other) { return axpy(1.0, other); }
Field& Field::operator-=(const Field& other) { return axpy(-1.0, other); }

Field& Field::operator*=(double s) {
  for (double& v : values_) v *= s;
  return *this;
}

Field& Field::axpy(double s, const Field& other) {
  require_same_grid(grid_, other.grid_, "field axpy");
  for (std::size_t n = 0; n < values_.size(); ++n) values_[n] += s * other.values_[n];
  return *this;
}

void Field::restrict_to_omega() {
  for (std::size_t j = 0; j < grid_.ny; ++j)
    for (std::size_t i = 0; i < grid_.nx; ++i)
      if (!grid_.in_omega(i, j)) values_[grid_.index(i, j)] = 0.0;
}

Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator*(double s, Field a) { return a *= s; }

void require_same_grid(const Grid2D& a, const Grid2D& b, const char* what) {
  if (!(a == b)) throw std::invalid_argument(std::string(what) + ": grid mismatch");
}

double inner_product_l2(const Field& u, const Field& v) {
  require_same_grid(u.grid(), v.grid(), "inner_product_l2");
  const Grid2D& g = u.grid();
  double s = 0.0;
  for (std::size_t j = 0; j < g.ny; ++j)
    for (std::size_t i = 0; i < g.nx; ++i)
      if (g.in_omega(i, j)) s += u(i, j) * v(i, j);
  return s * g.dx * g.dx;
}

double sample_bilinear(const Field& f, double px, double py) {
  const Grid2D& g = f.grid();
  const double fx = (px - g.origin_x) / g.dx;
  const double fy = (py - g.origin_y) / g.dx;
  if (fx < 0.0 || fy < 0.0 || fx > static_cast<double>(g.nx - 1) || fy > static_cast<double>(g.ny - 1)) return 0.0;
  auto i0 = static_cast<std::size_t>(std::floor(fx));
  auto j0 = static_cast<std::size_t>(std::floor(fy));
  i0 = std::min(i0, g.nx - 2);
  j0 = std::min(j0, g.ny - 2);
  const double tx = fx - static_cast<double>(i0);
  const double ty = fy - static_cast<double>(j0);
  return (1 - tx) * (1 - ty) * f(i0, j0) + tx * (1 - ty) * f(i0 + 1, j0) + (1 - tx) * ty * f(i0, j0 + 1) +
         tx * ty * f(i0 + 1, j0 + 1);
}

Field resample(const Field& f, const Grid2D& target) {
  if (f.grid() == target) return f;
  Field out(target);
  for (std::size_t j = 0; j < target.ny; ++j)
    for (std::size_t i = 0; i < target.nx; ++i) out(i, j) = sample_bilinear(f, target.x(i), target.y(j));
  return out;
}

}  // namespace pat
