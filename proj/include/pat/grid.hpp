#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace pat {

/// Uniform node-centered grid over a square window containing the unit disk.
///
/// Node (i, j) sits at (origin_x + i*dx, origin_y + j*dx). Storage of every
/// field defined on the grid is row-major with y as the outer index.
/// The outermost `pml_width` cells on each side form the absorbing layer.
struct Grid2D {
  std::size_t nx = 0;
  std::size_t ny = 0;
  double dx = 0.0;
  double origin_x = 0.0;
  double origin_y = 0.0;
  std::size_t pml_width = 0;

  /// Symmetric grid with a node at the origin, spacing `dx`, and the unit
  /// circle `pml_width + 3` cells inside the outer boundary.
  static Grid2D covering_unit_disk(double dx, std::size_t pml_width);

  /// Grid whose inner `n_across` x `n_across` node block spans [-1, 1]^2
  /// exactly (dx = 2 / (n_across - 1)), padded by `pml_width + 3` cells.
  static Grid2D spanning_unit_square(std::size_t n_across, std::size_t pml_width);

  std::size_t size() const { return nx * ny; }
  std::size_t index(std::size_t i, std::size_t j) const { return j * nx + i; }
  double x(std::size_t i) const { return origin_x + static_cast<double>(i) * dx; }
  double y(std::size_t j) const { return origin_y + static_cast<double>(j) * dx; }

  /// Node lies strictly inside the unit disk.
  bool in_omega(std::size_t i, std::size_t j) const;

  /// Node lies outside the absorbing layer.
  bool in_window(std::size_t i, std::size_t j) const {
    return i >= pml_width && j >= pml_width && i + pml_width < nx && j + pml_width < ny;
  }

  /// Throws std::invalid_argument when the grid violates its invariants.
  void validate() const;

  bool operator==(const Grid2D&) const = default;
};

/// Scalar nodal field on a Grid2D.
class Field {
 public:
  Field() = default;
  explicit Field(const Grid2D& grid, double fill = 0.0)
      : grid_(grid), values_(grid.size(), fill) {}
  Field(const Grid2D& grid, std::vector<double> values);

  const Grid2D& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }

  double& operator()(std::size_t i, std::size_t j) { return values_[grid_.index(i, j)]; }
  double operator()(std::size_t i, std::size_t j) const { return values_[grid_.index(i, j)]; }
  double& operator[](std::size_t n) { return values_[n]; }
  double operator[](std::size_t n) const { return values_[n]; }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  std::vector<double>& data() { return values_; }
  const std::vector<double>& data() const { return values_; }

  double max_abs() const;
  double min() const;
  double max() const;
  bool all_finite() const;

  Field& operator+=(const Field& other);
  Field& operator-=(const Field& other);
  Field& operator*=(double s);
  /// this += s * other
  Field& axpy(double s, const Field& other);

  /// Zero every node outside the open unit disk.
  void restrict_to_omega();

 private:
  Grid2D grid_;
  std::vector<double> values_;
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator*(double s, Field a);

/// Throws std::invalid_argument when the two grids differ.
void require_same_grid(const Grid2D& a, const Grid2D& b, const char* what);

/// Plain nodal L2(Omega) pairing dx^2 * sum u*v over interior Omega nodes.
double inner_product_l2(const Field& u, const Field& v);

/// Bilinear interpolation of `f` at a physical point; zero outside the grid.
double sample_bilinear(const Field& f, double px, double py);

/// Bilinear resampling of `f` onto `target`.
Field resample(const Field& f, const Grid2D& target);

}  // namespace pat
