#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "oracle.hpp"
#include "pat/harness.hpp"
#include "pat/wave.hpp"
#include "support.hpp"

using namespace pat;
using namespace pat::testing;

namespace {

InitialPressure bump_f(const Grid2D& g, double cx, double cy, double r) {
  PhantomSpec s;
  s.primitives.push_back({PrimitiveShape::smooth_bump, PhantomTarget::f, cx, cy, r, 0.0, 1.0, 0.0});
  return build_initial_pressure(s, g);
}

}  // namespace

TEST_CASE("detector arrays") {
  const DetectorArray full = DetectorArray::uniform(630);
  CHECK(full.size() == 630);
  CHECK(full.active_count() == 630);
  const auto w = full.weights();
  CHECK(std::abs(std::accumulate(w.begin(), w.end(), 0.0) - kTwoPi) < 1e-12);

  const DetectorArray half = DetectorArray::uniform(630, Arc::lower_half());
  CHECK(half.active_count() == 315);
  const auto wh = half.weights();
  for (std::size_t d = 0; d < half.size(); ++d)
    if (!half.active(d)) CHECK(wh[d] == 0.0);

  DetectorArray bad = full;
  std::swap(bad.angles[3], bad.angles[4]);
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("time axis") {
  const Grid2D g = Grid2D::covering_unit_disk(0.02, 10);
  const MediumField fish = fish_medium(g);
  const TimeAxis a = TimeAxis::for_medium(fish, 1.7);
  CHECK(std::abs(static_cast<double>(a.n_t) * a.dt - 1.7) < 1e-12);
  CHECK(a.dt <= g.dx / (15.0 * fish.c_max()) * (1.0 + 1e-12));
  CHECK(a.dt <= 0.5 * g.dx / (std::sqrt(2.0) * fish.c_max()));
  CHECK_THROWS_AS(TimeAxis::for_medium(fish, 1.0, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(TimeAxis::for_medium(fish, -1.0), std::invalid_argument);
}

TEST_CASE("zero data gives a zero trace") {
  const Grid2D g = Grid2D::covering_unit_disk(0.04, 10);
  const Sinogram m = solve_forward(InitialPressure::from_field(Field(g)), fish_medium(g), 1.0, DetectorArray::uniform(64));
  CHECK(m.max_abs() == 0.0);
  CHECK(std::abs(static_cast<double>(m.n_t) * m.dt - m.T) <= m.dt);
}

TEST_CASE("inactive detector rows are zero") {
  const Grid2D g = Grid2D::covering_unit_disk(0.04, 10);
  const InitialPressure f = bump_f(g, 0.1, 0.0, 0.4);
  const Sinogram m = solve_forward(f, fish_medium(g), 1.5, DetectorArray::uniform(64, Arc::lower_half()));
  for (std::size_t d = 0; d < m.n_det; ++d) {
    double row = 0.0;
    for (std::size_t k = 0; k < m.n_t; ++k) row = std::max(row, std::abs(m.at(d, k)));
    if (m.active(d)) {
      CHECK(row > 0.0);
    } else {
      CHECK(row == 0.0);
    }
  }
  CHECK_NOTHROW(m.validate());
}

TEST_CASE("trace matches the Poisson-formula oracle at dx = 0.01") {
  const Grid2D g = Grid2D::covering_unit_disk(0.01, 20);
  const RadialBump bump{0.2, -0.1, 0.4};
  const InitialPressure f = bump_f(g, bump.cx, bump.cy, bump.radius);
  const DetectorArray det = DetectorArray::uniform(32);
  const Sinogram m = solve_forward(f, MediumField::homogeneous(g), 2.0, det);

  const PoissonOracle oracle(bump, 192, 384);
  const std::size_t stride = 20;
  double num = 0.0;
  double den = 0.0;
#pragma omp parallel for reduction(+ : num, den) schedule(dynamic)
  for (std::size_t d = 0; d < m.n_det; ++d) {
    const double x = std::cos(m.angles[d]);
    const double y = std::sin(m.angles[d]);
    for (std::size_t k = stride - 1; k < m.n_t; k += stride) {
      const double ref = oracle(x, y, static_cast<double>(k + 1) * m.dt);
      num += (m.at(d, k) - ref) * (m.at(d, k) - ref);
      den += ref * ref;
    }
  }
  const double err = std::sqrt(num / den);
  MESSAGE("relative L2 trace error vs oracle: " << err);
  CHECK(err <= 0.02);
}

TEST_CASE("oracle quadrature is converged") {
  const RadialBump bump{0.2, -0.1, 0.4};
  const PoissonOracle coarse(bump, 192, 384);
  const PoissonOracle fine(bump, 384, 768);
  for (double t : {0.3, 0.8, 1.2, 1.7}) {
    const double a = coarse(0.6, 0.8, t);
    const double b = fine(0.6, 0.8, t);
    CHECK(std::abs(a - b) <= 1e-6);
  }
  CHECK(coarse(0.2, -0.1, 0.0) == doctest::Approx(1.0));
}

TEST_CASE("paper grid settings run") {
  const Grid2D g = Grid2D::covering_unit_disk(0.0095, 20);
  const PhantomSpec spec = PhantomSpec::builtin("mandrill");
  const MediumField medium = build_medium(spec, g);
  const InitialPressure f = build_initial_pressure(spec, g);
  const TimeAxis axis = TimeAxis::for_medium(medium, 0.5);
  CHECK(axis.dt <= g.dx / (15.0 * medium.c_max()) * (1.0 + 1e-12));
  const Sinogram m = solve_forward(f, medium, 0.5, DetectorArray::uniform(630));
  CHECK(m.n_det == 630);
  CHECK_NOTHROW(m.validate());
}

TEST_CASE("linearity") {
  const Grid2D g = Grid2D::covering_unit_disk(0.04, 10);
  const MediumField fish = fish_medium(g);
  const DetectorArray det = DetectorArray::uniform(48);
  const TimeAxis axis = TimeAxis::for_medium(fish, 1.5);
  const WaveSolver solver(fish, axis, det);
  const Field f1 = random_omega_field(g, 1);
  const Field f2 = random_omega_field(g, 2);
  const Sinogram lhs = solver.forward(2.5 * f1 - 0.75 * f2);
  Sinogram rhs = solver.forward(f1);
  rhs *= 2.5;
  Sinogram b = solver.forward(f2);
  b *= 0.75;
  rhs -= b;
  CHECK(norm_sigma(lhs - rhs) <= 1e-10 * norm_sigma(rhs));
}

TEST_CASE("snapshots") {
  const Grid2D g = Grid2D::covering_unit_disk(0.04, 10);
  const InitialPressure f = bump_f(g, 0.0, 0.0, 0.3);
  const MediumField fish = fish_medium(g);
  const TimeAxis axis = TimeAxis::for_medium(fish, 0.8);
  const auto two = solve_forward_full(f, fish, 0.8, axis.n_t + 1);
  REQUIRE(two.size() == 2);
  CHECK(two.front().t_index == 0);
  CHECK(two.back().t_index == axis.n_t);
  const auto many = solve_forward_full(f, fish, 0.8, 7);
  for (const WaveState& s : many) {
    CHECK(s.y_curr.all_finite());
    CHECK(s.y_prev.all_finite());
  }
  // The final snapshot agrees with the recorded run.
  CHECK(many.back().y_curr.data() == two.back().y_curr.data());
}

TEST_CASE("energy") {
  const Grid2D g = Grid2D::covering_unit_disk(0.01, 20);
  const InitialPressure f = bump_f(g, 0.1, -0.1, 0.3);
  SUBCASE("zero state") {
    WaveState s{Field(g), Field(g), 0, 0.001};
    CHECK(total_energy(s, MediumField::homogeneous(g)) == 0.0);
  }
  for (const char* name : {"homogeneous", "fish"}) {
    CAPTURE(name);
    const MediumField medium =
        std::string(name) == "fish" ? fish_medium(g) : MediumField::homogeneous(g);
    const double tp = time_to_pml(medium, f.values);
    const double T = std::min(1.5, tp);
    const TimeAxis axis = TimeAxis::for_medium(medium, T);
    const auto snaps = solve_forward_full(f, medium, T, std::max<std::size_t>(1, axis.n_t / 40));
    const double e0 = total_energy(snaps.front(), medium);
    const double half_semi = 0.5 * std::pow(seminorm_rho(f.values, medium), 2);
    CHECK(std::abs(e0 - half_semi) <= 1e-2 * half_semi);
    CHECK(max_energy_drift(snaps, medium, tp) <= 1e-2);
  }
}

TEST_CASE("energy bound") {
  const Grid2D g = Grid2D::covering_unit_disk(0.02, 20);
  for (const char* name : {"mandrill", "fish", "smooth"}) {
    CAPTURE(name);
    const PhantomSpec spec = PhantomSpec::builtin(name);
    const MediumField medium = build_medium(spec, g);
    const InitialPressure f = build_initial_pressure(spec, g);
    const double T = 2.0 * compute_T0(f, Arc::full(), medium);
    const double C = std::sqrt(std::max(1.0 + 2.0 * T * T, 2.0));
    const double bound = 1.05 * C * norm_H1kr(f.values, medium);
    const auto snaps = solve_forward_full(f, medium, T, 50);
    for (const WaveState& s : snaps) CHECK(window_norm_H1kr(s.y_curr, medium) <= bound);
  }
}

TEST_CASE("wave field outside the Euclidean cone decays within a few cells") {
  // Measured outside {|x - c| <= R + t + n dx} for a homogeneous medium.
  const Grid2D g = Grid2D::covering_unit_disk(0.02, 20);
  const double R = 0.25;
  const InitialPressure f = bump_f(g, -0.3, -0.2, R);
  const MediumField hom = MediumField::homogeneous(g);
  const double T = std::min(1.0, time_to_pml(hom, f.values));
  const auto snaps = solve_forward_full(f, hom, T, 20);
  auto outside = [&](double cells) {
    double worst = 0.0;
    for (const WaveState& s : snaps)
      for (std::size_t j = 0; j < g.ny; ++j)
        for (std::size_t i = 0; i < g.nx; ++i)
          if (g.in_window(i, j) && std::hypot(g.x(i) + 0.3, g.y(j) + 0.2) > R + s.time() + cells * g.dx)
            worst = std::max(worst, std::abs(s.y_curr(i, j)));
    return worst / f.values.max_abs();
  };
  const double at3 = outside(3.0);
  const double at8 = outside(8.0);
  MESSAGE("outside-cone magnitude at 3 dx: " << at3 << ", at 8 dx: " << at8);
  CHECK(at3 < 1e-3);
  CHECK(at8 <= 1e-6);
  CHECK(at8 < at3);
}

TEST_CASE("sinogram helpers") {
  const DetectorArray det = DetectorArray::uniform(16, Arc::lower_half());
  const TimeAxis axis{40, 0.05, 2.0};
  const Sinogram a = random_sinogram(det, axis, 3);
  CHECK(norm_sigma(a) > 0.0);
  CHECK(inner_product_sigma(a, a) == doctest::Approx(norm_sigma(a) * norm_sigma(a)));
  const Sinogram r = resample_time(a, 80);
  CHECK(r.n_t == 80);
  CHECK(std::abs(r.dt - 0.025) < 1e-15);
  // Samples at shared times are reproduced.
  for (std::size_t k = 0; k < 40; ++k) CHECK(std::abs(r.at(8, 2 * k + 1) - a.at(8, k)) < 1e-13);
  Sinogram bad = a;
  bad.samples[0] = std::nan("");
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  Sinogram wrong = a;
  wrong.at(0, 0) = 1.0;  // detector 0 (angle 0) is inactive on the lower half
  CHECK_THROWS_AS(wrong.validate(), std::invalid_argument);
}
