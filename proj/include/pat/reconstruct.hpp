#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "pat/adjoint.hpp"
#include "pat/medium.hpp"
#include "pat/wave.hpp"

namespace pat {

enum class ReconMethod { time_reversal, neumann, landweber };
enum class StopReason { k_max, discrepancy, stagnation };

std::string to_string(ReconMethod m);
std::string to_string(StopReason r);
/// Accepts "tr", "time_reversal", "neumann", "landweber".
ReconMethod parse_method(const std::string& s);

struct ReconConfig {
  ReconMethod method = ReconMethod::landweber;
  std::size_t k_max = 5;
  std::optional<double> omega;  // empty: 0.9 / ||L||^2 estimated
  double tau = 1.5;
  double delta = 0.0;  // 0: no discrepancy stop
  double taper_width = 10.0 * std::numbers::pi / 180.0;
  double T_multiple = 2.0;
  std::size_t power_iters = 10;
  std::uint64_t seed = 1;

  /// Throws std::invalid_argument on omega <= 0, tau <= 1, k_max < 1.
  void validate() const;
};

struct ReconResult {
  Field f_rec;
  std::vector<double> residual_history;  // ||L f_k - m|| for k = 0, 1, ...
  std::vector<double> error_history;     // empty without ground truth
  StopReason stop_reason = StopReason::k_max;
  std::size_t iterations = 0;
  double omega = 0.0;           // Landweber step actually used
  bool norm_warning = false;    // power iteration did not settle
  bool diverged = false;        // Neumann residual grew past 10x
};

/// Relative error of an iterate, used to fill error_history.
using ErrorFn = std::function<double(const Field&)>;

/// Operators shared by all reconstruction methods for one medium, time
/// grid and detector layout: forward solver, elliptic problems and the
/// interior time-reversal solver.
class ReconContext {
 public:
  ReconContext(const MediumField& medium, const TimeAxis& axis, const DetectorArray& detectors,
               EllipticSettings elliptic = {}, double taper_width = ReconConfig{}.taper_width);
  /// Time grid and detectors taken from a data set.
  static ReconContext for_data(const MediumField& medium, const Sinogram& m, EllipticSettings elliptic = {},
                               double taper_width = ReconConfig{}.taper_width);

  const WaveSolver& solver() const { return solver_; }
  const EllipticProblem& elliptic() const { return elliptic_; }
  const MediumField& medium() const { return solver_.medium(); }
  bool partial() const { return !solver_.detectors().arc.is_full(); }
  double taper_width() const { return taper_width_; }

  Sinogram forward(const Field& f) const { return solver_.forward(f); }

  /// Backward leapfrog on the disk nodes with boundary values from `h`,
  /// terminal data z(T) = initial (zero when null), z'(T) = 0; returns z(0).
  Field time_reverse(const Sinogram& h, const Field* initial = nullptr) const;
  /// time_reverse with the harmonic extension of h(., T) as terminal data.
  Field modified_time_reverse(const Sinogram& h) const;

  /// Data as seen by the time-reversal operators: the tapered extension for
  /// partial data, unchanged otherwise (including when no detector is active).
  Sinogram prepare(const Sinogram& h) const;

 private:
  void check_layout(const Sinogram& h) const;

  WaveSolver solver_;
  EllipticProblem elliptic_;
  RingInterpolator ring_;
  double taper_width_;
};

/// Tapered extension of partial data. Detectors whose offset from either
/// arc end exceeds `taper_width` are unchanged; in the shoulders the trace
/// of the nearest unchanged detector is continued with a cosine weight
/// falling to zero at the arc ends; rows off the arc are zero. In time,
/// the last 5% of (0, T] continues the last untouched sample with a
/// cosine weight falling to zero at T.
Sinogram extend_partial_data(const Sinogram& m, double taper_width);

Field time_reverse(const Sinogram& h, const ReconContext& ctx, const Field* initial = nullptr);
Field modified_time_reverse(const Sinogram& h, const ReconContext& ctx);

ReconResult reconstruct_time_reversal(const Sinogram& m, const ReconContext& ctx, const ErrorFn& error = {});
ReconResult reconstruct_neumann(const Sinogram& m, const ReconContext& ctx, std::size_t k,
                                const ErrorFn& error = {});
ReconResult reconstruct_landweber(const Sinogram& m, const ReconContext& ctx, const ReconConfig& config,
                                  const ErrorFn& error = {});

/// Dispatches on config.method (Neumann uses k_max as its iteration count).
ReconResult reconstruct(const Sinogram& m, const ReconContext& ctx, const ReconConfig& config,
                        const ErrorFn& error = {});

/// ||K|| for K = Id - Ltilde L by power iteration in the H1_{kappa,rho}
/// norm, starting from `start`; returns the last norm ratio.
double estimate_contraction(const ReconContext& ctx, const Field& start, std::size_t trials);
/// Same, starting from a random smooth field.
double estimate_contraction(const ReconContext& ctx, std::size_t trials, std::uint64_t seed);

}  // namespace pat
