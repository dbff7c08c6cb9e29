#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "pat/harness.hpp"
#include "pat/io.hpp"
#include "pat/reconstruct.hpp"

namespace fs = std::filesystem;
using namespace pat;

namespace {

struct Globals {
  double grid_dx = 0.01;
  double dt_divisor = TimeAxis::kDefaultDivisor;
  std::size_t pml_width = 20;
  double t_mult = 2.0;
  std::uint64_t seed = 1;
  std::size_t threads = 1;
  std::string out = ".";
};

void log_config(const std::string& command, const Globals& g,
                const std::vector<std::pair<std::string, std::string>>& extra) {
  std::cerr << "# " << command << " configuration\n";
  std::cerr << "#   grid_dx = " << g.grid_dx << "\n#   dt_divisor = " << g.dt_divisor
            << "\n#   pml_width = " << g.pml_width << "\n#   t_mult = " << g.t_mult << "\n#   seed = " << g.seed
            << "\n#   threads = " << g.threads << "\n#   out = " << g.out << "\n";
  for (const auto& [k, v] : extra) std::cerr << "#   " << k << " = " << v << "\n";
}

std::string num(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

MediumField variant_of(const MediumField& base, MediumVariant v) {
  switch (v) {
    case MediumVariant::product_in_kappa: return base.product_in_kappa();
    case MediumVariant::product_in_rho: return base.product_in_rho();
    default: return base;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Photoacoustic tomography with variable compressibility and density"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--grid-dx", g.grid_dx, "Grid spacing")->check(CLI::PositiveNumber);
  app.add_option("--dt-divisor", g.dt_divisor, "Time step dt = dx / (divisor * c_max)")->check(CLI::PositiveNumber);
  app.add_option("--pml-width", g.pml_width, "Absorbing layer width in cells");
  app.add_option("--t-mult", g.t_mult, "Measurement time as a multiple of T0")->check(CLI::PositiveNumber);
  app.add_option("--seed", g.seed, "Random seed");
  app.add_option("--threads", g.threads, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--out", g.out, "Output file or directory");

  // phantom
  auto* phantom = app.add_subcommand("phantom", "Build a phantom and save f, kappa, rho");
  std::string phantom_spec = "builtin:mandrill";
  phantom->add_option("--spec", phantom_spec, "Phantom file or builtin:<name>");

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Forward solve to a sinogram");
  std::string sim_spec = "builtin:mandrill";
  std::string sim_arc = "full";
  std::size_t n_det = 630;
  simulate->add_option("--spec", sim_spec, "Phantom file or builtin:<name>");
  simulate->add_option("--arc", sim_arc, "full, lower_half, or 'start_deg, end_deg'");
  simulate->add_option("--n-det", n_det, "Detector count")->check(CLI::Range(2, 1000000));

  // noise
  auto* noise = app.add_subcommand("noise", "Add Gaussian noise at a given SNR");
  std::string noise_in;
  double snr = 10.0;
  noise->add_option("--in", noise_in, "Input sinogram")->required();
  noise->add_option("--snr", snr, "SNR in dB relative to max |m| (inf: no noise)");

  // reconstruct
  auto* recon = app.add_subcommand("reconstruct", "Reconstruct f from a sinogram");
  std::string method = "landweber";
  std::string data_path;
  std::string recon_spec = "builtin:mandrill";
  std::string truth_spec;
  std::string variant = "true";
  std::size_t k = 5;
  double omega = 0.0;
  double tau = 1.5;
  double delta = 0.0;
  double taper_deg = 10.0;
  recon->add_option("--method", method, "tr | neumann | landweber")->check(CLI::IsMember({"tr", "neumann", "landweber"}));
  recon->add_option("--data", data_path, "Input sinogram");
  recon->add_option("--spec", recon_spec, "Phantom providing kappa and rho for the reconstruction");
  recon->add_option("--medium-variant", variant, "true | product_in_kappa | product_in_rho");
  recon->add_option("--truth", truth_spec, "Phantom whose f is used for error histories");
  recon->add_option("--k", k, "Iteration count");
  auto* omega_opt = recon->add_option("--omega", omega, "Landweber step (default: 0.9/||L||^2 estimate)");
  recon->add_option("--tau", tau, "Discrepancy parameter");
  recon->add_option("--delta", delta, "Noise level estimate (0: no discrepancy stop)");
  recon->add_option("--taper-deg", taper_deg, "Partial-data taper width in degrees");

  // eikonal
  auto* eik = app.add_subcommand("eikonal", "Travel-time map and T0");
  std::string eik_spec = "builtin:mandrill";
  std::string eik_arc = "full";
  eik->add_option("--spec", eik_spec, "Phantom file or builtin:<name>");
  eik->add_option("--arc", eik_arc, "Detection arc");

  // verify
  auto* ver = app.add_subcommand("verify", "Run an invariant suite");
  std::string suite = "adjoint";
  std::string size = "tiny";
  ver->add_option("--suite", suite, "adjoint | energy | cone | norms | reduction")
      ->check(CLI::IsMember({"adjoint", "energy", "cone", "norms", "reduction"}));
  ver->add_option("--size", size, "tiny | small")->check(CLI::IsMember({"tiny", "small"}));

  // experiment
  auto* exp = app.add_subcommand("experiment", "Run an experiment spec");
  std::string exp_path;
  exp->add_option("spec", exp_path, "Experiment spec file")->required();

  // report
  auto* rep = app.add_subcommand("report", "Summarize experiment outputs");
  std::vector<std::string> rep_paths;
  rep->add_option("paths", rep_paths, "summary.csv files or experiment directories")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e) == 0 ? 0 : 1;
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

#ifdef _OPENMP
  omp_set_num_threads(static_cast<int>(g.threads));
#endif

  try {
    if (phantom->parsed()) {
      log_config("phantom", g, {{"spec", phantom_spec}});
      const PhantomSpec spec = PhantomSpec::resolve(phantom_spec);
      const Grid2D grid = Grid2D::covering_unit_disk(g.grid_dx, g.pml_width);
      const MediumField medium = build_medium(spec, grid);
      const InitialPressure f = build_initial_pressure(spec, grid);
      fs::create_directories(g.out);
      const fs::path out(g.out);
      write_field((out / "f.fld").string(), f.values);
      write_field((out / "kappa.fld").string(), medium.kappa());
      write_field((out / "rho.fld").string(), medium.rho());
      emit_image(f.values, (out / "f.pgm").string());
      emit_image(medium.kappa(), (out / "kappa.pgm").string());
      emit_image(medium.rho(), (out / "rho.pgm").string());
      std::cout << "wrote f, kappa, rho (" << grid.nx << "x" << grid.ny << ") to " << g.out << "\n";
    } else if (simulate->parsed()) {
      log_config("simulate", g, {{"spec", sim_spec}, {"arc", sim_arc}, {"n_det", std::to_string(n_det)}});
      const PhantomSpec spec = PhantomSpec::resolve(sim_spec);
      const Grid2D grid = Grid2D::covering_unit_disk(g.grid_dx, g.pml_width);
      const MediumField medium = build_medium(spec, grid);
      const InitialPressure f = build_initial_pressure(spec, grid);
      const Arc arc = parse_arc(sim_arc);
      const double T0 = compute_T0(f, arc, medium);
      const Sinogram m = solve_forward(f, medium, g.t_mult * T0, DetectorArray::uniform(n_det, arc), g.dt_divisor);
      const std::string path = fs::is_directory(g.out) ? (fs::path(g.out) / "data.sino").string() : g.out;
      write_sinogram(path, m);
      std::cout << "T0 = " << num(T0) << ", T = " << num(m.T) << ", n_t = " << m.n_t << ", wrote " << path << "\n";
    } else if (noise->parsed()) {
      log_config("noise", g, {{"in", noise_in}, {"snr", num(snr)}});
      const Sinogram m = read_sinogram(noise_in);
      const Sinogram noisy = add_noise(m, snr, g.seed);
      write_sinogram(g.out, noisy);
      std::cout << "sigma = " << num(std::isfinite(snr) ? noise_sigma(m, snr) : 0.0)
                << ", noise norm = " << num(norm_sigma(noisy - m)) << ", wrote " << g.out << "\n";
    } else if (recon->parsed()) {
      ReconConfig cfg;
      cfg.method = parse_method(method);
      cfg.k_max = k;
      if (omega_opt->count() > 0) cfg.omega = omega;
      cfg.tau = tau;
      cfg.delta = delta;
      cfg.taper_width = taper_deg * std::numbers::pi / 180.0;
      cfg.T_multiple = g.t_mult;
      cfg.seed = g.seed;
      cfg.validate();
      const MediumVariant mv = parse_medium_variant(variant);
      if (data_path.empty()) throw std::invalid_argument("reconstruct: --data is required");
      log_config("reconstruct", g,
                 {{"method", method}, {"data", data_path}, {"spec", recon_spec}, {"medium_variant", variant},
                  {"k", std::to_string(k)}, {"omega", cfg.omega ? num(*cfg.omega) : "auto"}, {"tau", num(tau)},
                  {"delta", num(delta)}, {"taper_deg", num(taper_deg)}});
      const Sinogram raw = read_sinogram(data_path);
      const Grid2D grid = Grid2D::covering_unit_disk(g.grid_dx, g.pml_width);
      const PhantomSpec spec = PhantomSpec::resolve(recon_spec);
      const MediumField medium = variant_of(build_medium(spec, grid), mv);
      const TimeAxis axis = TimeAxis::for_medium(medium, raw.T, g.dt_divisor);
      const Sinogram m = axis.matches(raw) ? raw : resample_time(raw, axis.n_t);
      const ReconContext ctx(medium, axis, m.detectors(), EllipticSettings{}, cfg.taper_width);
      ErrorFn err;
      Field truth;
      if (!truth_spec.empty()) {
        truth = build_initial_pressure(PhantomSpec::resolve(truth_spec), grid).values;
        err = [&](const Field& x) { return rel_l2_error(x, truth); };
      }
      const ReconResult res = reconstruct(m, ctx, cfg, err);
      fs::create_directories(g.out);
      const fs::path out(g.out);
      write_field((out / "f_rec.fld").string(), res.f_rec);
      emit_image(res.f_rec, (out / "f_rec.pgm").string());
      std::ofstream hist(out / "history.csv");
      hist << "k,residual,rel_l2_error\n" << std::setprecision(17);
      for (std::size_t i = 0; i < res.residual_history.size(); ++i) {
        hist << i << "," << res.residual_history[i] << ",";
        if (i < res.error_history.size()) hist << res.error_history[i];
        hist << "\n";
      }
      std::cout << "method " << method << ": iterations " << res.iterations << ", stop " << to_string(res.stop_reason)
                << ", final residual " << num(res.residual_history.back());
      if (!res.error_history.empty()) std::cout << ", rel_l2_error " << num(res.error_history.back());
      if (cfg.method == ReconMethod::landweber) std::cout << ", omega " << num(res.omega);
      if (res.norm_warning) std::cout << " (warning: norm estimate not converged)";
      if (res.diverged) std::cout << " (warning: residual diverged)";
      std::cout << "\n";
    } else if (eik->parsed()) {
      log_config("eikonal", g, {{"spec", eik_spec}, {"arc", eik_arc}});
      const PhantomSpec spec = PhantomSpec::resolve(eik_spec);
      const Grid2D grid = Grid2D::covering_unit_disk(g.grid_dx, g.pml_width);
      const MediumField medium = build_medium(spec, grid);
      const InitialPressure f = build_initial_pressure(spec, grid);
      const Arc arc = parse_arc(eik_arc);
      const EikonalField d = eikonal_from_arc(medium.slowness(), arc);
      const double T0 = compute_T0(f, arc, medium);
      fs::create_directories(g.out);
      emit_image(d.dist, (fs::path(g.out) / "eikonal.pgm").string());
      std::cout << "T0 = " << num(T0) << "\nexit-time surrogate = " << num(exit_time_surrogate(medium)) << "\n";
    } else if (ver->parsed()) {
      log_config("verify", g, {{"suite", suite}, {"size", size}});
      const VerifyReport r = verify(suite, size);
      print_report(r, std::cout);
      return r.passed() ? 0 : 2;
    } else if (exp->parsed()) {
      ExperimentSpec spec = ExperimentSpec::load(exp_path);
      if (app.get_option("--out")->count() > 0) spec.output_dir = g.out;
      if (app.get_option("--threads")->count() > 0) spec.threads = g.threads;
      log_config("experiment", g, {{"spec", exp_path}, {"output", spec.output_dir}});
      const ExperimentReport r = run_experiment(spec, &std::cerr);
      std::cout << report_summaries({r.summary_path});
      for (const CellResult& c : r.cells)
        if (!c.error.empty()) return 2;
    } else if (rep->parsed()) {
      std::vector<std::string> files;
      for (const std::string& p : rep_paths) {
        if (fs::is_directory(p)) {
          for (const auto& e : fs::recursive_directory_iterator(p))
            if (e.path().filename() == "summary.csv") files.push_back(e.path().string());
        } else {
          files.push_back(p);
        }
      }
      std::sort(files.begin(), files.end());
      if (files.empty()) throw std::invalid_argument("report: no summary.csv found");
      std::cout << report_summaries(files);
    }
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
