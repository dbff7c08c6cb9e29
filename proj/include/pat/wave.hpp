#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "pat/arc.hpp"
#include "pat/grid.hpp"
#include "pat/medium.hpp"

namespace pat {

/// Raised when a run becomes numerically unusable (instability, NaN,
/// non-convergence that must abort). The CLI maps it to exit code 2.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Detection points on the unit circle; the active subset forms the arc S.
struct DetectorArray {
  std::vector<double> angles;  // strictly increasing in [0, 2*pi)
  Arc arc;

  /// `n_det` equally spaced points starting at angle 0.
  static DetectorArray uniform(std::size_t n_det, const Arc& arc = Arc::full());
  /// Throws std::invalid_argument on unsorted angles or a non-contiguous arc.
  void validate() const;

  std::size_t size() const { return angles.size(); }
  bool active(std::size_t d) const { return arc.contains(angles[d]); }
  std::size_t active_count() const;
  /// Arc-length quadrature weight per detector (trapezoid in angle);
  /// zero for inactive detectors.
  std::vector<double> weights() const;
};

/// Four-node bilinear stencil at a detector position.
struct BilinearStencil {
  std::array<std::size_t, 4> nodes{};
  std::array<double, 4> weights{};
};

std::vector<BilinearStencil> detector_stencils(const Grid2D& grid, const DetectorArray& detectors);

/// Sampled trace on S x (0, T]. Sample k of every row is at time (k+1)*dt.
struct Sinogram {
  std::size_t n_det = 0;
  std::size_t n_t = 0;
  double dt = 0.0;
  double T = 0.0;
  Arc arc;
  std::vector<double> angles;
  std::vector<double> samples;  // detector-major: samples[d * n_t + k]

  static Sinogram zeros(const DetectorArray& detectors, std::size_t n_t, double dt);

  double& at(std::size_t d, std::size_t k) { return samples[d * n_t + k]; }
  double at(std::size_t d, std::size_t k) const { return samples[d * n_t + k]; }
  DetectorArray detectors() const { return DetectorArray{angles, arc}; }
  bool active(std::size_t d) const { return arc.contains(angles[d]); }
  double max_abs() const;

  /// Same detector layout and time grid.
  bool compatible(const Sinogram& other) const;
  Sinogram& operator+=(const Sinogram& other);
  Sinogram& operator-=(const Sinogram& other);
  Sinogram& operator*=(double s);
  /// Throws std::invalid_argument on inconsistent sizes or non-finite data.
  void validate() const;
};

Sinogram operator-(Sinogram a, const Sinogram& b);

/// L2(Sigma) pairing: sum over active detectors of arc weight * dt * a * b.
double inner_product_sigma(const Sinogram& a, const Sinogram& b);
double norm_sigma(const Sinogram& a);

/// Linear interpolation in time onto `n_t` samples over the same T.
Sinogram resample_time(const Sinogram& s, std::size_t n_t);

/// Solver time grid: n_t steps of dt with n_t * dt = T exactly.
struct TimeAxis {
  std::size_t n_t = 0;
  double dt = 0.0;
  double T = 0.0;

  static constexpr double kDefaultDivisor = 15.0;
  /// dt = dx / (divisor * c_max), shrunk so that it divides T. Throws
  /// std::invalid_argument when the step would violate
  /// dt <= 0.5 * dx / (sqrt(2) * c_max).
  static TimeAxis for_medium(const MediumField& medium, double T, double dt_divisor = kDefaultDivisor);
  bool matches(const Sinogram& s) const;
};

struct WaveState {
  Field y_prev;
  Field y_curr;
  std::size_t t_index = 0;
  double dt = 0.0;

  double time() const { return static_cast<double>(t_index) * dt; }
};

struct PmlSettings {
  double reflection = 1e-6;
};

/// Explicit solver for kappa y'' = div(rho^{-1} grad y) on the padded grid.
///
/// Staggered pressure/velocity leapfrog; eliminating the velocities gives
/// the 5-point divergence-form scheme for y in the physical window. The
/// absorbing layer uses split pressure components with a quadratic
/// damping profile. `adjoint_l2` runs the exact algebraic transpose of
/// `forward` (same coefficients, reversed order).
class WaveSolver {
 public:
  WaveSolver(const MediumField& medium, const TimeAxis& axis, const DetectorArray& detectors,
             const PmlSettings& pml = {});

  const TimeAxis& axis() const { return axis_; }
  const Grid2D& grid() const { return medium_.grid(); }
  const MediumField& medium() const { return medium_; }
  const DetectorArray& detectors() const { return detectors_; }

  /// Trace of the solution at the detectors; inactive rows are zero.
  Sinogram forward(const Field& f) const;
  /// Strided snapshots, always including t = 0 and t = T.
  std::vector<WaveState> forward_snapshots(const Field& f, std::size_t stride) const;
  /// Adjoint of `forward` with respect to the L2(Sigma) and L2(Omega)
  /// pairings; zero outside the open unit disk.
  Field adjoint_l2(const Sinogram& h) const;

  static constexpr std::size_t kMaxSnapshotBytes = std::size_t{2} << 30;

 private:
  struct State;
  void initialize(const Field& f, State& s) const;
  void step(State& s) const;
  void record(const State& s, std::size_t k, Sinogram& out) const;
  void check_finite(const State& s, std::size_t step_index) const;

  MediumField medium_;
  TimeAxis axis_;
  DetectorArray detectors_;
  std::vector<BilinearStencil> stencils_;
  std::vector<char> active_;
  // Node coefficients (zero on the outermost ring) and face coefficients.
  std::vector<double> apx_, bpx_, apy_, bpy_;
  std::vector<double> avx_, bvx_, avy_, bvy_;
  std::vector<double> cinit_x_, cinit_y_;
};

/// Convenience wrapper building a solver for one run.
Sinogram solve_forward(const InitialPressure& f, const MediumField& medium, double T, const DetectorArray& detectors,
                       double dt_divisor = TimeAxis::kDefaultDivisor);

std::vector<WaveState> solve_forward_full(const InitialPressure& f, const MediumField& medium, double T,
                                          std::size_t stride, double dt_divisor = TimeAxis::kDefaultDivisor);

/// 1/2 int kappa y'^2 + rho^{-1} grad y_curr . grad y_prev over the
/// physical window, y' = (y_curr - y_prev) / dt.
double total_energy(const WaveState& state, const MediumField& medium);

/// ||y||_{1;kappa,rho} restricted to the physical window.
double window_norm_H1kr(const Field& y, const MediumField& medium);

}  // namespace pat
