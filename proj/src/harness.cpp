#include "pat/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

#include "pat/io.hpp"
#include "pat/keyvalue.hpp"

namespace pat {

double noise_sigma(const Sinogram& m, double snr_db) {
  return m.max_abs() * std::pow(10.0, -snr_db / 20.0);
}

Sinogram add_noise(const Sinogram& m, double snr_db, std::uint64_t seed) {
  if (std::isinf(snr_db) && snr_db > 0) return m;
  if (!std::isfinite(snr_db)) throw std::invalid_argument("add_noise: SNR must be finite or +inf");
  if (m.max_abs() == 0.0) throw std::invalid_argument("add_noise: SNR is undefined for an all-zero sinogram");
  const double sigma = noise_sigma(m, snr_db);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, sigma);
  Sinogram out = m;
  for (std::size_t d = 0; d < m.n_det; ++d) {
    if (!m.active(d)) continue;
    for (std::size_t k = 0; k < m.n_t; ++k) out.at(d, k) += nd(rng);
  }
  return out;
}

double rel_l2_error(const Field& f_rec, const Field& f_true) {
  const Field truth = f_true.grid() == f_rec.grid() ? f_true : resample(f_true, f_rec.grid());
  const double denom = inner_product_l2(truth, truth);
  if (denom == 0.0) throw std::invalid_argument("rel_l2_error: reference field is zero on the disk");
  const Field diff = f_rec - truth;
  return std::sqrt(inner_product_l2(diff, diff) / denom);
}

std::string to_string(MediumVariant v) {
  switch (v) {
    case MediumVariant::true_params: return "true";
    case MediumVariant::product_in_kappa: return "product_in_kappa";
    case MediumVariant::product_in_rho: return "product_in_rho";
  }
  return "?";
}

MediumVariant parse_medium_variant(const std::string& s) {
  if (s == "true") return MediumVariant::true_params;
  if (s == "product_in_kappa") return MediumVariant::product_in_kappa;
  if (s == "product_in_rho") return MediumVariant::product_in_rho;
  throw std::invalid_argument("unknown medium variant '" + s + "' (expected true, product_in_kappa, product_in_rho)");
}

Arc parse_arc(const std::string& s) {
  if (s == "full") return Arc::full();
  if (s == "lower_half") return Arc::lower_half();
  const std::vector<std::string> parts = split_list(s);
  if (parts.size() == 2) {
    const double deg = std::numbers::pi / 180.0;
    return Arc{parse_double(parts[0], "arc start") * deg, parse_double(parts[1], "arc end") * deg};
  }
  throw std::invalid_argument("unknown arc '" + s + "' (expected full, lower_half or 'start_deg, end_deg')");
}

std::string arc_label(const Arc& arc) {
  if (arc == Arc::full()) return "full";
  if (arc == Arc::lower_half()) return "lower_half";
  std::ostringstream s;
  s << std::setprecision(6) << arc.start * 180.0 / std::numbers::pi << "-" << arc.end * 180.0 / std::numbers::pi;
  return s.str();
}

ExperimentSpec ExperimentSpec::parse(const std::string& text) {
  const KeyValueDocument doc = KeyValueDocument::parse(text);
  if (!doc.sections.empty()) throw std::invalid_argument("experiment spec: sections are not supported");
  const KeyValueSection& kv = doc.top;
  static const char* known[] = {"name", "phantom", "recon_phantom", "media", "n_det", "arcs", "T_multiples",
                                "snr_db", "methods", "k", "seeds", "sim_dx", "recon_dx", "pml_width",
                                "dt_divisor", "discrepancy", "tau", "taper_deg", "power_iters", "output",
                                "threads"};
  for (const auto& [key, value] : kv.entries) {
    if (std::find_if(std::begin(known), std::end(known), [&](const char* k) { return key == k; }) ==
        std::end(known))
      throw std::invalid_argument("experiment spec: unknown key '" + key + "'");
  }
  ExperimentSpec s;
  s.name = kv.get_or("name", s.name);
  s.phantom = kv.get_or("phantom", s.phantom);
  s.recon_phantom = kv.get_or("recon_phantom", "");
  if (kv.has("media")) {
    s.media.clear();
    for (const std::string& m : kv.get_list("media")) s.media.push_back(parse_medium_variant(m));
  }
  s.n_det = static_cast<std::size_t>(kv.get_int("n_det", static_cast<long>(s.n_det)));
  if (kv.has("arcs")) {
    // "full; lower_half; 200, 300" - arcs are separated by semicolons.
    s.arcs.clear();
    std::stringstream ss(*kv.get("arcs"));
    std::string item;
    while (std::getline(ss, item, ';')) s.arcs.push_back(parse_arc(trim(item)));
  }
  if (kv.has("T_multiples")) s.T_multiples = kv.get_doubles("T_multiples");
  if (kv.has("snr_db")) s.snr_db = kv.get_doubles("snr_db");
  if (kv.has("methods")) {
    for (const std::string& m : kv.get_list("methods"))
      if (!m.empty()) s.methods.push_back(parse_method(m));
  }
  s.k = static_cast<std::size_t>(kv.get_int("k", static_cast<long>(s.k)));
  if (kv.has("seeds")) {
    s.seeds.clear();
    for (double v : kv.get_doubles("seeds")) s.seeds.push_back(static_cast<std::uint64_t>(v));
  }
  s.sim_dx = kv.get_double("sim_dx", s.sim_dx);
  s.recon_dx = kv.get_double("recon_dx", s.recon_dx);
  s.pml_width = static_cast<std::size_t>(kv.get_int("pml_width", static_cast<long>(s.pml_width)));
  s.dt_divisor = kv.get_double("dt_divisor", s.dt_divisor);
  if (kv.has("discrepancy")) {
    const std::string v = *kv.get("discrepancy");
    if (v != "true" && v != "false") throw std::invalid_argument("experiment spec: discrepancy must be true or false");
    s.discrepancy = v == "true";
  }
  s.tau = kv.get_double("tau", s.tau);
  s.taper_deg = kv.get_double("taper_deg", s.taper_deg);
  s.power_iters = static_cast<std::size_t>(kv.get_int("power_iters", static_cast<long>(s.power_iters)));
  s.output_dir = kv.get_or("output", s.output_dir);
  s.threads = static_cast<std::size_t>(kv.get_int("threads", static_cast<long>(s.threads)));
  s.validate();
  return s;
}

ExperimentSpec ExperimentSpec::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open experiment spec '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

void ExperimentSpec::validate() const {
  if (media.empty() || arcs.empty() || T_multiples.empty() || snr_db.empty() || seeds.empty())
    throw std::invalid_argument("experiment spec: media, arcs, T_multiples, snr_db and seeds must be non-empty");
  if (n_det < 2) throw std::invalid_argument("experiment spec: n_det must be at least 2");
  for (double t : T_multiples)
    if (!(t > 0.0)) throw std::invalid_argument("experiment spec: T multiples must be positive");
  for (double s : snr_db)
    if (std::isnan(s) || s == -kNoNoise) throw std::invalid_argument("experiment spec: invalid SNR");
  if (!(sim_dx > 0.0) || !(recon_dx > 0.0)) throw std::invalid_argument("experiment spec: grid spacing must be positive");
  if (k < 1) throw std::invalid_argument("experiment spec: k must be at least 1");
  if (!(tau > 1.0)) throw std::invalid_argument("experiment spec: tau must exceed 1");
  if (threads < 1) throw std::invalid_argument("experiment spec: threads must be at least 1");
  for (const Arc& a : arcs) DetectorArray::uniform(n_det, a).validate();
}

namespace {

std::string fmt(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string short_num(double v) {
  if (std::isinf(v)) return "inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

struct DataSet {
  Arc arc;
  double T_multiple = 0.0;
  double T = 0.0;
  Sinogram clean;
};

struct Context {
  MediumVariant variant;
  std::size_t data_index;
  std::unique_ptr<ReconContext> ctx;
  std::once_flag omega_once;
  double omega = 0.0;
  bool omega_warning = false;
  std::string omega_error;
};

struct Cell {
  Context* context = nullptr;
  const DataSet* data = nullptr;
  double snr_db = kNoNoise;
  std::uint64_t seed = 1;
  ReconMethod method = ReconMethod::time_reversal;
  std::string label;
  std::shared_ptr<const Sinogram> noisy;  // on the reconstruction time grid
  double delta = 0.0;
};

void write_history(const std::string& path, const ReconResult& r) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << "k,residual,rel_l2_error\n";
  for (std::size_t k = 0; k < r.residual_history.size(); ++k) {
    out << k << "," << fmt(r.residual_history[k]) << ",";
    out << (k < r.error_history.size() ? fmt(r.error_history[k]) : "") << "\n";
  }
}

}  // namespace

ExperimentReport run_experiment(const ExperimentSpec& spec, std::ostream* log) {
  spec.validate();
  namespace fs = std::filesystem;
  const fs::path out_dir(spec.output_dir);
  fs::create_directories(out_dir);
  auto say = [&](const std::string& msg) {
    if (log) *log << msg << std::endl;
  };

  const PhantomSpec phantom = PhantomSpec::resolve(spec.phantom);
  const PhantomSpec recon_phantom =
      spec.recon_phantom.empty() ? phantom : PhantomSpec::resolve(spec.recon_phantom);
  const Grid2D sim_grid = Grid2D::covering_unit_disk(spec.sim_dx, spec.pml_width);
  const Grid2D rec_grid = Grid2D::covering_unit_disk(spec.recon_dx, spec.pml_width);
  const MediumField sim_medium = build_medium(phantom, sim_grid);
  const InitialPressure f = build_initial_pressure(phantom, sim_grid);
  const MediumField rec_base = build_medium(recon_phantom, rec_grid);
  const Field f_true_rec = resample(f.values, rec_grid);
  emit_image(f_true_rec, (out_dir / "f_true.pgm").string());
  emit_image(rec_base.kappa(), (out_dir / "kappa.pgm").string());
  emit_image(rec_base.rho(), (out_dir / "rho.pgm").string());
  say("experiment " + spec.name + ": sim grid " + std::to_string(sim_grid.nx) + "x" + std::to_string(sim_grid.ny) +
      ", reconstruction grid " + std::to_string(rec_grid.nx) + "x" + std::to_string(rec_grid.ny));

  // Data on the fine grid for every (arc, T multiple).
  std::vector<DataSet> data;
  for (const Arc& arc : spec.arcs) {
    const double T0 = compute_T0(f, arc, sim_medium);
    for (double mult : spec.T_multiples) {
      DataSet ds;
      ds.arc = arc;
      ds.T_multiple = mult;
      ds.T = mult * T0;
      ds.clean = solve_forward(f, sim_medium, ds.T, DetectorArray::uniform(spec.n_det, arc), spec.dt_divisor);
      const std::string tag = arc_label(arc) + "_T" + short_num(mult);
      write_sinogram((out_dir / ("data_" + tag + ".sino")).string(), ds.clean);
      say("simulated " + tag + ": T0 = " + fmt(T0) + ", n_t = " + std::to_string(ds.clean.n_t));
      data.push_back(std::move(ds));
    }
  }

  std::vector<MediumField> rec_media;
  for (MediumVariant v : spec.media) {
    switch (v) {
      case MediumVariant::true_params: rec_media.push_back(rec_base); break;
      case MediumVariant::product_in_kappa: rec_media.push_back(rec_base.product_in_kappa()); break;
      case MediumVariant::product_in_rho: rec_media.push_back(rec_base.product_in_rho()); break;
    }
  }

  std::vector<std::unique_ptr<Context>> contexts;
  std::vector<Cell> cells;
  if (!spec.methods.empty()) {
    for (std::size_t vi = 0; vi < spec.media.size(); ++vi) {
      for (std::size_t di = 0; di < data.size(); ++di) {
        const DataSet& ds = data[di];
        auto c = std::make_unique<Context>();
        c->variant = spec.media[vi];
        c->data_index = di;
        const TimeAxis axis = TimeAxis::for_medium(rec_media[vi], ds.T, spec.dt_divisor);
        c->ctx = std::make_unique<ReconContext>(rec_media[vi], axis, DetectorArray::uniform(spec.n_det, ds.arc),
                                                EllipticSettings{}, spec.taper_deg * std::numbers::pi / 180.0);
        const Sinogram clean_rec = resample_time(ds.clean, axis.n_t);
        for (double snr : spec.snr_db) {
          const bool noisy = std::isfinite(snr);
          for (std::uint64_t seed : spec.seeds) {
            if (!noisy && seed != spec.seeds.front()) continue;  // seeds only matter with noise
            const Sinogram degraded = add_noise(ds.clean, snr, seed);
            const std::string dtag = arc_label(ds.arc) + "_T" + short_num(ds.T_multiple) + "_snr" + short_num(snr) +
                                     "_s" + std::to_string(seed);
            if (noisy && vi == 0) write_sinogram((out_dir / ("data_" + dtag + ".sino")).string(), degraded);
            auto rec_data = std::make_shared<const Sinogram>(resample_time(degraded, axis.n_t));
            const double delta = noisy ? norm_sigma(*rec_data - clean_rec) : 0.0;
            for (ReconMethod m : spec.methods) {
              Cell cell;
              cell.context = c.get();
              cell.data = &ds;
              cell.snr_db = snr;
              cell.seed = seed;
              cell.method = m;
              cell.noisy = rec_data;
              cell.delta = delta;
              cell.label = to_string(spec.media[vi]) + "_" + dtag + "_" + to_string(m);
              cells.push_back(std::move(cell));
            }
          }
        }
        contexts.push_back(std::move(c));
      }
    }
  }

  std::vector<CellResult> results(cells.size());
  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      Cell& cell = cells[i];
      CellResult& r = results[i];
      r.experiment_id = spec.name + ":" + to_string(cell.context->variant) + ":seed" + std::to_string(cell.seed);
      r.method = to_string(cell.method);
      r.T_multiple = cell.data->T_multiple;
      r.snr_db = cell.snr_db;
      r.arc = arc_label(cell.data->arc);
      const auto t_start = std::chrono::steady_clock::now();
      try {
        const ReconContext& ctx = *cell.context->ctx;
        const ErrorFn err = [&](const Field& g) { return rel_l2_error(g, f_true_rec); };
        ReconResult res;
        if (cell.method == ReconMethod::landweber) {
          Context& c = *cell.context;
          std::call_once(c.omega_once, [&] {
            try {
              const NormEstimate est = operator_norm_estimate(ctx.solver(), ctx.elliptic(), spec.power_iters, 1);
              c.omega = est.value > 0.0 ? 0.9 / (est.value * est.value) : 0.0;
              c.omega_warning = !est.converged;
            } catch (const std::exception& e) {
              c.omega_error = e.what();
            }
          });
          if (!c.omega_error.empty()) throw NumericalError(c.omega_error);
          ReconConfig cfg;
          cfg.method = ReconMethod::landweber;
          cfg.k_max = spec.k;
          cfg.omega = c.omega;
          cfg.tau = spec.tau;
          cfg.delta = spec.discrepancy ? cell.delta : 0.0;
          res = reconstruct_landweber(*cell.noisy, ctx, cfg, err);
          res.norm_warning = c.omega_warning;
        } else if (cell.method == ReconMethod::neumann) {
          res = reconstruct_neumann(*cell.noisy, ctx, spec.k, err);
        } else {
          res = reconstruct_time_reversal(*cell.noisy, ctx, err);
        }
        r.k = res.iterations;
        r.rel_l2_error = res.error_history.back();
        r.residual_final = res.residual_history.back();
        r.stop_reason = res.diverged ? "diverged" : to_string(res.stop_reason);
        emit_image(res.f_rec, (out_dir / (cell.label + ".pgm")).string());
        write_history((out_dir / (cell.label + "_history.csv")).string(), res);
      } catch (const std::exception& e) {
        r.error = e.what();
        r.rel_l2_error = std::numeric_limits<double>::quiet_NaN();
        r.residual_final = std::numeric_limits<double>::quiet_NaN();
        r.stop_reason = "failed";
      }
      r.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
      std::lock_guard lock(log_mutex);
      say("cell " + cell.label + ": " + (r.error.empty() ? "error " + fmt(r.rel_l2_error) : "FAILED " + r.error));
    }
  };
  const std::size_t n_workers = std::max<std::size_t>(1, std::min(spec.threads, cells.size()));
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < n_workers; ++t) pool.emplace_back(worker);
  }

  ExperimentReport report;
  report.summary_path = (out_dir / "summary.csv").string();
  std::ofstream summary(report.summary_path);
  if (!summary) throw std::runtime_error("cannot write '" + report.summary_path + "'");
  summary << kSummaryHeader << "\n";
  for (const CellResult& r : results) {
    summary << r.experiment_id << "," << r.method << "," << short_num(r.T_multiple) << "," << short_num(r.snr_db)
            << "," << r.arc << "," << r.k << "," << fmt(r.rel_l2_error) << "," << fmt(r.residual_final) << ","
            << r.stop_reason << "," << std::fixed << std::setprecision(3) << r.wall_time_s << std::defaultfloat
            << "\n";
  }
  bool any_failed = false;
  std::ofstream errors;
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (results[i].error.empty()) continue;
    if (!any_failed) errors.open(out_dir / "errors.log");
    any_failed = true;
    errors << cells[i].label << ": " << results[i].error << "\n";
  }
  report.cells = std::move(results);
  return report;
}

std::string report_summaries(const std::vector<std::string>& summary_paths) {
  struct Row {
    std::vector<std::string> cells;
  };
  std::vector<Row> rows;
  for (const std::string& path : summary_paths) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open summary '" + path + "'");
    std::string line;
    std::getline(in, line);
    if (trim(line) != kSummaryHeader) throw std::invalid_argument(path + ": not a summary CSV");
    while (std::getline(in, line)) {
      if (trim(line).empty()) continue;
      Row r;
      std::stringstream ss(line);
      std::string cell;
      while (std::getline(ss, cell, ',')) r.cells.push_back(cell);
      if (r.cells.size() != 10) throw std::invalid_argument(path + ": malformed row '" + line + "'");
      rows.push_back(std::move(r));
    }
  }
  std::ostringstream out;
  const std::vector<std::string> header = split_list(kSummaryHeader);
  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) width[c] = header[c].size();
  auto shown = [](const std::vector<std::string>& r, std::size_t c) {
    if (c == 6 || c == 7) {
      const double v = std::strtod(r[c].c_str(), nullptr);
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.4g", v);
      return std::string(buf);
    }
    return r[c];
  };
  for (const Row& r : rows)
    for (std::size_t c = 0; c < header.size(); ++c) width[c] = std::max(width[c], shown(r.cells, c).size());
  for (std::size_t c = 0; c < header.size(); ++c) out << std::left << std::setw(static_cast<int>(width[c] + 2)) << header[c];
  out << "\n";
  std::map<std::string, std::pair<double, int>> per_method;
  for (const Row& r : rows) {
    for (std::size_t c = 0; c < header.size(); ++c)
      out << std::left << std::setw(static_cast<int>(width[c] + 2)) << shown(r.cells, c);
    out << "\n";
    const double e = std::strtod(r.cells[6].c_str(), nullptr);
    if (std::isfinite(e)) {
      auto& acc = per_method[r.cells[1]];
      acc.first += e;
      acc.second += 1;
    }
  }
  out << "\nmean rel_l2_error per method\n";
  for (const auto& [method, acc] : per_method) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4g", acc.first / acc.second);
    out << "  " << std::left << std::setw(12) << method << buf << "  (" << acc.second << " cells)\n";
  }
  return out.str();
}

}  // namespace pat
