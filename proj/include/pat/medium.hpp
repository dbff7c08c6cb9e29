#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pat/arc.hpp"
#include "pat/grid.hpp"

namespace pat {

/// Compressibility and density on a grid, with kappa = rho = 1 outside the
/// unit disk. Immutable after construction.
class MediumField {
 public:
  /// Validates positivity and the exterior normalization kappa*rho = 1.
  static MediumField from_fields(Field kappa, Field rho);
  static MediumField homogeneous(const Grid2D& grid) { return from_fields(Field(grid, 1.0), Field(grid, 1.0)); }

  const Grid2D& grid() const { return kappa_.grid(); }
  const Field& kappa() const { return kappa_; }
  const Field& rho() const { return rho_; }

  double kappa_min() const { return kappa_min_; }
  double kappa_max() const { return kappa_max_; }
  double rho_min() const { return rho_min_; }
  double rho_max() const { return rho_max_; }
  /// (kappa_min * rho_min)^(-1/2)
  double c_max() const { return c_max_; }

  /// Face values of 1/rho (harmonic mean of the nodal 1/rho). x faces are
  /// indexed j*(nx-1)+i for the face between (i,j) and (i+1,j); y faces
  /// j*nx+i for the face between (i,j) and (i,j+1).
  const std::vector<double>& inv_rho_x() const { return inv_rho_x_; }
  const std::vector<double>& inv_rho_y() const { return inv_rho_y_; }

  /// sqrt(kappa*rho) at every node.
  Field slowness() const;

  /// Reconstruction-model variants from the mismatch experiments:
  /// (kappa*rho, 1) and (1, kappa*rho).
  MediumField product_in_kappa() const;
  MediumField product_in_rho() const;

  /// Resamples both fields onto another grid (bilinear), restoring the
  /// exterior normalization exactly.
  MediumField resampled(const Grid2D& target) const;

 private:
  MediumField(Field kappa, Field rho);

  Field kappa_;
  Field rho_;
  double kappa_min_ = 1, kappa_max_ = 1, rho_min_ = 1, rho_max_ = 1, c_max_ = 1;
  std::vector<double> inv_rho_x_;
  std::vector<double> inv_rho_y_;
};

/// Absorption density f, vanishing near and outside the unit circle.
struct InitialPressure {
  Field values;
  double support_radius = 0.0;

  static constexpr double kDefaultMargin = 0.05;
  /// Wraps a field, rejecting support within `margin` of the unit circle.
  static InitialPressure from_field(Field values, double margin = kDefaultMargin);
};

enum class PhantomTarget { f, kappa, rho };
enum class PrimitiveShape { disk, smooth_bump, annulus };

struct Primitive {
  PrimitiveShape shape = PrimitiveShape::disk;
  PhantomTarget target = PhantomTarget::f;
  double cx = 0.0;
  double cy = 0.0;
  double radius = 0.1;
  double inner_radius = 0.0;  // annulus only
  double amplitude = 1.0;     // field value inside the primitive
  double smoothing = 0.0;     // edge width (standard deviation), length units
};

/// Grayscale raster painted inside a disk of radius `mask_radius`; gray
/// levels map linearly onto [lo, hi].
struct RasterSource {
  std::string path;
  PhantomTarget target = PhantomTarget::f;
  double lo = 0.0;
  double hi = 1.0;
  double mask_radius = 0.95;
};

/// Procedural phantom description. Primitives are painted in order: each
/// blends the current value toward its amplitude by its profile in [0,1].
/// Backgrounds are f = 0, kappa = rho = 1.
struct PhantomSpec {
  std::string name;
  std::vector<Primitive> primitives;
  std::vector<RasterSource> rasters;

  /// `key = value` dialect, one `[primitive]` or `[raster]` block per item.
  static PhantomSpec parse(const std::string& text, const std::string& base_dir = ".");
  static PhantomSpec load(const std::string& path);
  /// Built-in look-alikes: "empty", "mandrill", "fish", "smooth", "bump".
  static PhantomSpec builtin(const std::string& name);
  /// Path starting with "builtin:" selects a built-in, anything else a file.
  static PhantomSpec resolve(const std::string& ref);
};

MediumField build_medium(const PhantomSpec& spec, const Grid2D& grid);
InitialPressure build_initial_pressure(const PhantomSpec& spec, const Grid2D& grid,
                                       double margin = InitialPressure::kDefaultMargin);

/// Discrete int kappa*u*v + rho^{-1} grad u . grad v over the whole grid,
/// with gradients as centered differences at cell faces.
double inner_product_H1kr(const Field& u, const Field& v, const MediumField& medium);
double norm_H1kr(const Field& u, const MediumField& medium);
/// Standard H1 inner product (kappa = rho = 1).
double inner_product_H1(const Field& u, const Field& v);
double norm_H1(const Field& u);
/// (int rho^{-1} |grad u|^2)^{1/2}
double seminorm_rho(const Field& u, const MediumField& medium);

struct EikonalField {
  Field dist;
  std::string source_set;
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

/// First-order fast marching for |grad d| = slowness.
EikonalField eikonal_distance(const Field& slowness, const std::vector<Point2>& sources);
EikonalField eikonal_distance(const MediumField& medium, const std::vector<Point2>& sources);
/// Distance to the set of nodes where `mask` is nonzero (d = 0 there).
EikonalField eikonal_from_nodes(const Field& slowness, const Field& mask);
/// Distance to a detection arc on the unit circle.
EikonalField eikonal_from_arc(const Field& slowness, const Arc& arc);

/// Maximal travel time from supp(f) to the arc.
double compute_T0(const InitialPressure& f, const Arc& arc, const MediumField& medium);
double compute_T0(const Field& f, const Arc& arc, const Field& slowness);

/// 2 * max over Omega of the distance to the full circle (reference value
/// for the exit time of singularities; not claimed to equal it).
double exit_time_surrogate(const MediumField& medium);

}  // namespace pat
