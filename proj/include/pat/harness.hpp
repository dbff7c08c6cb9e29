#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "pat/medium.hpp"
#include "pat/reconstruct.hpp"
#include "pat/wave.hpp"

namespace pat {

/// SNR sentinel meaning "no noise".
inline constexpr double kNoNoise = std::numeric_limits<double>::infinity();

/// Standard deviation max|m| * 10^(-snr_db/20).
double noise_sigma(const Sinogram& m, double snr_db);
/// i.i.d. Gaussian noise on the active rows; m unchanged for kNoNoise.
Sinogram add_noise(const Sinogram& m, double snr_db, std::uint64_t seed);

/// ||f_rec - f_true|| / ||f_true|| over the disk of f_rec's grid; f_true is
/// resampled bilinearly when the grids differ.
double rel_l2_error(const Field& f_rec, const Field& f_true);

enum class MediumVariant { true_params, product_in_kappa, product_in_rho };
std::string to_string(MediumVariant v);
MediumVariant parse_medium_variant(const std::string& s);

/// Named arcs: "full", "lower_half", or "a, b" in degrees.
Arc parse_arc(const std::string& s);
std::string arc_label(const Arc& arc);

struct ExperimentSpec {
  std::string name = "experiment";
  std::string phantom = "builtin:mandrill";
  std::string recon_phantom;  // empty: same as phantom
  std::vector<MediumVariant> media{MediumVariant::true_params};
  std::size_t n_det = 630;
  std::vector<Arc> arcs{Arc::full()};
  std::vector<double> T_multiples{2.0};
  std::vector<double> snr_db{kNoNoise};
  std::vector<ReconMethod> methods;
  std::size_t k = 5;
  std::vector<std::uint64_t> seeds{1};
  double sim_dx = 0.0095;
  double recon_dx = 0.01;
  std::size_t pml_width = 20;
  double dt_divisor = TimeAxis::kDefaultDivisor;
  bool discrepancy = true;  // Landweber stops at tau * true noise norm
  double tau = 1.5;
  double taper_deg = 10.0;
  std::size_t power_iters = 10;
  std::string output_dir = "out";
  std::size_t threads = 1;

  /// Keys mirror the field names; lists are comma separated.
  static ExperimentSpec parse(const std::string& text);
  static ExperimentSpec load(const std::string& path);
  void validate() const;
};

struct CellResult {
  std::string experiment_id;
  std::string method;
  double T_multiple = 0.0;
  double snr_db = kNoNoise;
  std::string arc;
  std::size_t k = 0;
  double rel_l2_error = 0.0;
  double residual_final = 0.0;
  std::string stop_reason;
  double wall_time_s = 0.0;
  std::string error;  // non-empty when the cell failed
};

struct ExperimentReport {
  std::vector<CellResult> cells;
  std::string summary_path;
};

/// Simulates on the fine grid, degrades, reconstructs on the coarse grid
/// and writes images, histories and summary.csv. Failed cells are recorded
/// and the run continues.
ExperimentReport run_experiment(const ExperimentSpec& spec, std::ostream* log = nullptr);

inline const char* kSummaryHeader =
    "experiment_id,method,T_multiple,snr_db,arc,k,rel_l2_error,residual_final,stop_reason,wall_time_s";

struct VerifyCheck {
  std::string name;
  double measured = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct VerifyReport {
  std::string suite;
  std::string size;
  std::vector<VerifyCheck> checks;
  bool passed() const;
};

/// suite in {adjoint, energy, cone, norms, reduction}, size in {tiny, small}.
VerifyReport verify(const std::string& suite, const std::string& size);
void print_report(const VerifyReport& report, std::ostream& out);

/// Reads summary CSVs and renders a per-cell table plus per-method means.
std::string report_summaries(const std::vector<std::string>& summary_paths);

// Diagnostics shared by the verify suites and the acceptance tests.

/// Earliest arrival time at the absorbing layer from supp(f).
double time_to_pml(const MediumField& medium, const Field& f);
/// max |E(t)/E(0) - 1| over snapshots with t below `t_limit`.
double max_energy_drift(const std::vector<WaveState>& snaps, const MediumField& medium, double t_limit);
/// max over snapshots of |y| outside the eikonal cone of supp(f) dilated by
/// `dilation`, relative to max|f| (absorbing layer excluded).
double max_outside_cone(const std::vector<WaveState>& snaps, const Field& f, const MediumField& medium,
                        double dilation);

}  // namespace pat
