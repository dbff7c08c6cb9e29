#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <random>

#include "pat/adjoint.hpp"
#include "pat/harness.hpp"

namespace pat {

bool VerifyReport::passed() const {
  return !checks.empty() && std::all_of(checks.begin(), checks.end(), [](const VerifyCheck& c) { return c.pass; });
}

void print_report(const VerifyReport& report, std::ostream& out) {
  out << "verify " << report.suite << "/" << report.size << "\n";
  for (const VerifyCheck& c : report.checks) {
    out << "  [" << (c.pass ? "PASS" : "FAIL") << "] " << c.name << ": measured " << std::setprecision(6)
        << c.measured << ", tolerance " << c.tolerance << "\n";
  }
  out << (report.passed() ? "PASSED" : "FAILED") << "\n";
}

namespace {

Field support_mask(const Field& f) {
  Field mask(f.grid());
  for (std::size_t n = 0; n < f.size(); ++n) mask[n] = f[n] != 0.0 ? 1.0 : 0.0;
  return mask;
}

double rel(double a, double b) {
  const double s = std::max(std::abs(a), std::abs(b));
  return s == 0.0 ? 0.0 : std::abs(a - b) / s;
}

Field omega_noise(const Grid2D& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  Field f(g);
  for (std::size_t j = 0; j < g.ny; ++j)
    for (std::size_t i = 0; i < g.nx; ++i) {
      const double v = nd(rng);
      if (g.in_omega(i, j)) f(i, j) = v;
    }
  return f;
}

Sinogram data_noise(const DetectorArray& det, const TimeAxis& axis, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  Sinogram s = Sinogram::zeros(det, axis.n_t, axis.dt);
  for (std::size_t d = 0; d < s.n_det; ++d)
    for (std::size_t k = 0; k < s.n_t; ++k) {
      const double v = nd(rng);
      if (s.active(d)) s.at(d, k) = v;
    }
  return s;
}

Grid2D square_grid(bool tiny) {
  return tiny ? Grid2D::spanning_unit_square(12, 4) : Grid2D::spanning_unit_square(32, 6);
}

Grid2D disk_grid(bool tiny) {
  return tiny ? Grid2D::covering_unit_disk(0.04, 10) : Grid2D::covering_unit_disk(0.02, 20);
}

void suite_adjoint(bool tiny, VerifyReport& rep) {
  const Grid2D g = square_grid(tiny);
  const MediumField medium = build_medium(PhantomSpec::builtin("fish"), g);
  const TimeAxis axis = TimeAxis::for_medium(medium, tiny ? 0.6 : 1.5);
  if (tiny) {
    const DetectorArray det = DetectorArray::uniform(12, Arc::lower_half());
    const WaveSolver solver(medium, axis, det);
    const std::vector<double> w = det.weights();
    std::vector<std::size_t> nodes;
    std::vector<Sinogram> cols;
    for (std::size_t n = 0; n < g.size(); ++n) {
      if (!g.in_omega(n % g.nx, n / g.nx)) continue;
      Field e(g);
      e[n] = 1.0;
      nodes.push_back(n);
      cols.push_back(solver.forward(e));
    }
    double dev = 0.0;
    for (std::size_t d = 0; d < det.size(); ++d) {
      if (!det.active(d)) continue;
      for (std::size_t k = 0; k < axis.n_t; ++k) {
        Sinogram unit = Sinogram::zeros(det, axis.n_t, axis.dt);
        unit.at(d, k) = 1.0;
        const Field a = solver.adjoint_l2(unit);
        for (std::size_t c = 0; c < nodes.size(); ++c)
          dev = std::max(dev, std::abs(a[nodes[c]] - w[d] * axis.dt * cols[c].at(d, k) / (g.dx * g.dx)));
      }
    }
    rep.checks.push_back({"explicit transpose max deviation (12x12)", dev, 1e-12, dev <= 1e-12});
  }
  double worst = 0.0;
  double worst_h1 = 0.0;
  const EllipticProblem problem(medium);
  for (const Arc& arc : {Arc::full(), Arc::lower_half()}) {
    const DetectorArray det = DetectorArray::uniform(tiny ? 16 : 64, arc);
    const WaveSolver solver(medium, axis, det);
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      const Field f = omega_noise(g, seed);
      const Sinogram h = data_noise(det, axis, 1000 + seed);
      const double lhs = inner_product_sigma(solver.forward(f), h);
      worst = std::max(worst, rel(lhs, inner_product_l2(f, solver.adjoint_l2(h))));
      worst_h1 = std::max(worst_h1, rel(lhs, inner_product_H1kr(adjoint_H1(h, solver, problem), f, medium)));
    }
  }
  rep.checks.push_back({"L2 dot test relative mismatch", worst, 1e-10, worst <= 1e-10});
  rep.checks.push_back({"H1 duality relative mismatch", worst_h1, 1e-8, worst_h1 <= 1e-8});
}

void suite_energy(bool tiny, VerifyReport& rep) {
  const Grid2D g = disk_grid(tiny);
  const InitialPressure f = build_initial_pressure(PhantomSpec::builtin("bump"), g);
  for (const char* name : {"homogeneous", "fish"}) {
    const MediumField medium = std::string(name) == "fish" ? build_medium(PhantomSpec::builtin("fish"), g)
                                                           : MediumField::homogeneous(g);
    const double t_limit = time_to_pml(medium, f.values);
    const TimeAxis axis = TimeAxis::for_medium(medium, t_limit);
    const auto snaps = solve_forward_full(f, medium, t_limit, std::max<std::size_t>(1, axis.n_t / 20));
    const double drift = max_energy_drift(snaps, medium, t_limit);
    rep.checks.push_back({std::string("energy drift before the absorbing layer (") + name + ")", drift, 1e-2,
                          drift <= 1e-2});
    const double e0 = total_energy(snaps.front(), medium);
    const double half_semi = 0.5 * std::pow(seminorm_rho(f.values, medium), 2);
    const double d0 = rel(e0, half_semi);
    rep.checks.push_back({std::string("E(0) vs half squared rho-seminorm (") + name + ")", d0, 1e-2, d0 <= 1e-2});
  }
}

void suite_cone(bool tiny, VerifyReport& rep) {
  const Grid2D g = disk_grid(tiny);
  PhantomSpec spec;
  spec.primitives.push_back({PrimitiveShape::smooth_bump, PhantomTarget::f, -0.3, -0.2, 0.25, 0.0, 1.0, 0.0});
  // kappa*rho from 1 down to 1/4 (speed up to 2).
  spec.primitives.push_back({PrimitiveShape::smooth_bump, PhantomTarget::kappa, 0.2, 0.1, 0.6, 0.0, 0.5, 0.0});
  spec.primitives.push_back({PrimitiveShape::smooth_bump, PhantomTarget::rho, 0.2, 0.1, 0.6, 0.0, 0.5, 0.0});
  const MediumField medium = build_medium(spec, g);
  const InitialPressure f = build_initial_pressure(spec, g);
  const double T = std::min(1.2, time_to_pml(medium, f.values));
  const TimeAxis axis = TimeAxis::for_medium(medium, T);
  const auto snaps = solve_forward_full(f, medium, T, std::max<std::size_t>(1, axis.n_t / 24));
  const double v = max_outside_cone(snaps, f.values, medium, 3.0 * g.dx);
  rep.checks.push_back({"max |y| outside dilated cone / max|f|", v, 1e-6, v <= 1e-6});
}

void suite_norms(bool tiny, VerifyReport& rep) {
  const Grid2D g = disk_grid(tiny);
  const MediumField medium = build_medium(PhantomSpec::builtin("fish"), g);
  const double lo = std::sqrt(std::min(medium.kappa_min(), 1.0 / medium.rho_max()));
  const double hi = std::sqrt(std::max(medium.kappa_max(), 1.0 / medium.rho_min()));
  double slack_lo = 1e300;
  double slack_hi = 1e300;
  for (std::uint64_t s = 0; s < 200; ++s) {
    const Field phi = random_smooth_field(g, 77 + s, static_cast<int>(s % 9));
    const double n1 = norm_H1(phi);
    const double nkr = norm_H1kr(phi, medium);
    slack_lo = std::min(slack_lo, (nkr - lo * n1) / nkr);
    slack_hi = std::min(slack_hi, (hi * n1 - nkr) / nkr);
  }
  rep.checks.push_back({"lower equivalence slack (min over 200 fields)", slack_lo, -1e-10, slack_lo >= -1e-10});
  rep.checks.push_back({"upper equivalence slack (min over 200 fields)", slack_hi, -1e-10, slack_hi >= -1e-10});
}

void suite_reduction(bool tiny, VerifyReport& rep) {
  // No absorbing layer: both schemes then share the zero edge condition.
  const Grid2D g = Grid2D::covering_unit_disk(tiny ? 0.04 : 0.02, 0);
  PhantomSpec spec = PhantomSpec::builtin("bump");
  spec.primitives.push_back({PrimitiveShape::smooth_bump, PhantomTarget::kappa, 0.1, -0.1, 0.6, 0.0, 0.45, 0.0});
  const MediumField medium = build_medium(spec, g);  // rho = 1, kappa = 1/c^2
  const InitialPressure f = build_initial_pressure(spec, g);
  const double T = 1.0;
  const TimeAxis axis = TimeAxis::for_medium(medium, T);
  const std::size_t stride = std::max<std::size_t>(1, axis.n_t / 10);
  const auto snaps = solve_forward_full(f, medium, T, stride);

  // u_tt = c^2 Laplacian(u), second-order Taylor start.
  const std::size_t nx = g.nx;
  std::vector<double> c2(g.size());
  for (std::size_t n = 0; n < g.size(); ++n) c2[n] = 1.0 / medium.kappa()[n];
  const double r = axis.dt * axis.dt / (g.dx * g.dx);
  std::vector<double> prev = f.values.data(), cur(g.size(), 0.0), next(g.size(), 0.0);
  auto lap = [&](const std::vector<double>& u, std::size_t n) {
    return u[n - 1] + u[n + 1] + u[n - nx] + u[n + nx] - 4.0 * u[n];
  };
  for (std::size_t j = 1; j + 1 < g.ny; ++j)
    for (std::size_t i = 1; i + 1 < nx; ++i) {
      const std::size_t n = j * nx + i;
      cur[n] = prev[n] + 0.5 * r * c2[n] * lap(prev, n);
    }
  double worst = 0.0;
  std::size_t level = 1;
  for (const WaveState& s : snaps) {
    if (s.t_index == 0) continue;
    while (level < s.t_index) {
      for (std::size_t j = 1; j + 1 < g.ny; ++j)
        for (std::size_t i = 1; i + 1 < nx; ++i) {
          const std::size_t n = j * nx + i;
          next[n] = 2.0 * cur[n] - prev[n] + r * c2[n] * lap(cur, n);
        }
      std::swap(prev, cur);
      std::swap(cur, next);
      ++level;
    }
    double diff = 0.0;
    double scale = 0.0;
    for (std::size_t j = 0; j < g.ny; ++j)
      for (std::size_t i = 0; i < nx; ++i) {
        if (!g.in_window(i, j)) continue;
        diff = std::max(diff, std::abs(s.y_curr(i, j) - cur[j * nx + i]));
        scale = std::max(scale, std::abs(cur[j * nx + i]));
      }
    worst = std::max(worst, diff / scale);
  }
  rep.checks.push_back({"rho = 1 solver vs direct c^2 Laplacian scheme (relative)", worst, 1e-10, worst <= 1e-10});
}

}  // namespace

double time_to_pml(const MediumField& medium, const Field& f) {
  const EikonalField d = eikonal_from_nodes(medium.slowness(), support_mask(f));
  const Grid2D& g = medium.grid();
  double t = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < g.ny; ++j)
    for (std::size_t i = 0; i < g.nx; ++i)
      if (!g.in_window(i, j)) t = std::min(t, d.dist(i, j));
  return t;
}

double max_energy_drift(const std::vector<WaveState>& snaps, const MediumField& medium, double t_limit) {
  if (snaps.empty()) throw std::invalid_argument("max_energy_drift: no snapshots");
  const double e0 = total_energy(snaps.front(), medium);
  if (e0 == 0.0) throw std::invalid_argument("max_energy_drift: zero initial energy");
  double drift = 0.0;
  for (const WaveState& s : snaps)
    if (s.time() <= t_limit) drift = std::max(drift, std::abs(total_energy(s, medium) / e0 - 1.0));
  return drift;
}

double max_outside_cone(const std::vector<WaveState>& snaps, const Field& f, const MediumField& medium,
                        double dilation) {
  const EikonalField d = eikonal_from_nodes(medium.slowness(), support_mask(f));
  const Grid2D& g = medium.grid();
  const double fmax = f.max_abs();
  if (fmax == 0.0) throw std::invalid_argument("max_outside_cone: zero initial field");
  double worst = 0.0;
  for (const WaveState& s : snaps) {
    const double t = s.time();
    for (std::size_t j = 0; j < g.ny; ++j)
      for (std::size_t i = 0; i < g.nx; ++i)
        if (g.in_window(i, j) && d.dist(i, j) > t + dilation) worst = std::max(worst, std::abs(s.y_curr(i, j)));
  }
  return worst / fmax;
}

VerifyReport verify(const std::string& suite, const std::string& size) {
  if (size != "tiny" && size != "small") throw std::invalid_argument("verify: size must be tiny or small");
  const bool tiny = size == "tiny";
  VerifyReport rep;
  rep.suite = suite;
  rep.size = size;
  if (suite == "adjoint") {
    suite_adjoint(tiny, rep);
  } else if (suite == "energy") {
    suite_energy(tiny, rep);
  } else if (suite == "cone") {
    suite_cone(tiny, rep);
  } else if (suite == "norms") {
    suite_norms(tiny, rep);
  } else if (suite == "reduction") {
    suite_reduction(tiny, rep);
  } else {
    throw std::invalid_argument("verify: unknown suite '" + suite + "' (adjoint, energy, cone, norms, reduction)");
  }
  return rep;
}

}  // namespace pat
