#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>
#include <queue>

#include "pat/adjoint.hpp"
#include "pat/medium.hpp"
#include "pat/pgm.hpp"
#include "support.hpp"

using namespace pat;
using namespace pat::testing;

namespace {

// Dijkstra on the 8-connected node graph; edge cost = mean slowness * length.
Field dijkstra(const Field& slowness, std::size_t si, std::size_t sj) {
  const Grid2D& g = slowness.grid();
  Field d(g, std::numeric_limits<double>::infinity());
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> q;
  d(si, sj) = 0.0;
  q.push({0.0, g.index(si, sj)});
  while (!q.empty()) {
    const auto [dist, n] = q.top();
    q.pop();
    if (dist > d[n]) continue;
    const long i = static_cast<long>(n % g.nx);
    const long j = static_cast<long>(n / g.nx);
    for (int di = -1; di <= 1; ++di)
      for (int dj = -1; dj <= 1; ++dj) {
        if (di == 0 && dj == 0) continue;
        const long a = i + di;
        const long b = j + dj;
        if (a < 0 || b < 0 || a >= static_cast<long>(g.nx) || b >= static_cast<long>(g.ny)) continue;
        const std::size_t m = g.index(static_cast<std::size_t>(a), static_cast<std::size_t>(b));
        const double len = g.dx * std::hypot(double(di), double(dj));
        const double nd = dist + 0.5 * (slowness[n] + slowness[m]) * len;
        if (nd < d[m]) {
          d[m] = nd;
          q.push({nd, m});
        }
      }
  }
  return d;
}

Field disk_f(const Grid2D& g, double cx, double cy, double r) {
  PhantomSpec s;
  s.primitives.push_back({PrimitiveShape::disk, PhantomTarget::f, cx, cy, r, 0.0, 1.0, 0.0});
  return build_initial_pressure(s, g).values;
}

}  // namespace

TEST_CASE("grid invariants") {
  const Grid2D g = Grid2D::covering_unit_disk(0.02, 20);
  CHECK(g.nx == g.ny);
  CHECK(g.nx >= 16);
  // Unit circle at least pml_width + 2 cells inside the outer boundary.
  CHECK(g.origin_x + static_cast<double>(g.pml_width + 2) * g.dx <= -1.0);
  CHECK(g.x(g.nx - 1) - static_cast<double>(g.pml_width + 2) * g.dx >= 1.0);
  CHECK(std::abs(g.x(g.nx / 2)) < 1e-15);

  Grid2D bad = g;
  bad.nx = 10;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  CHECK_THROWS_AS(Grid2D::covering_unit_disk(-0.1, 10), std::invalid_argument);

  const Grid2D sq = tiny_grid();
  CHECK(std::abs(sq.dx - 2.0 / 11.0) < 1e-15);
}

TEST_CASE("field arithmetic and resampling") {
  const Grid2D g = Grid2D::covering_unit_disk(0.05, 6);
  Field u(g);
  for (std::size_t j = 0; j < g.ny; ++j)
    for (std::size_t i = 0; i < g.nx; ++i) u(i, j) = 2.0 * g.x(i) - g.y(j) + 0.5;
  // Bilinear resampling reproduces affine functions away from the edges.
  const Grid2D h = Grid2D::covering_unit_disk(0.04, 6);
  const Field v = resample(u, h);
  double worst = 0.0;
  for (std::size_t j = 0; j < h.ny; ++j)
    for (std::size_t i = 0; i < h.nx; ++i)
      if (std::hypot(h.x(i), h.y(j)) < 1.2) worst = std::max(worst, std::abs(v(i, j) - (2.0 * h.x(i) - h.y(j) + 0.5)));
  CHECK(worst < 1e-12);

  Field w = u;
  w.axpy(-1.0, u);
  CHECK(w.max_abs() == 0.0);
  CHECK_THROWS_AS(u += Field(h), std::invalid_argument);
}

TEST_CASE("build_medium examples") {
  const Grid2D g = Grid2D::covering_unit_disk(0.01, 20);
  SUBCASE("empty spec is homogeneous") {
    const MediumField m = build_medium(PhantomSpec::builtin("empty"), g);
    CHECK(m.kappa().min() == 1.0);
    CHECK(m.kappa().max() == 1.0);
    CHECK(m.rho().min() == 1.0);
    CHECK(m.rho().max() == 1.0);
    CHECK(m.c_max() == 1.0);
  }
  SUBCASE("fish bounds") {
    const MediumField m = fish_medium(g);
    CHECK(m.kappa_min() >= 1.0 - 1e-12);
    CHECK(m.kappa_max() <= 14.3 + 1e-12);
    CHECK(m.kappa_max() >= 14.3 * 0.99);
    CHECK(m.rho_min() >= 0.02 - 1e-12);
    CHECK(m.rho_min() <= 0.02 * 1.01);
    CHECK(m.rho_max() <= 1.0 + 1e-12);
    for (std::size_t j = 0; j < g.ny; ++j)
      for (std::size_t i = 0; i < g.nx; ++i)
        if (!g.in_omega(i, j)) CHECK(std::abs(m.kappa()(i, j) * m.rho()(i, j) - 1.0) <= 1e-12);
  }
  SUBCASE("negative density is rejected") {
    PhantomSpec s;
    s.primitives.push_back({PrimitiveShape::disk, PhantomTarget::rho, 0.0, 0.0, 0.3, 0.0, -0.5, 0.0});
    CHECK_THROWS_AS(build_medium(s, g), std::invalid_argument);
  }
  SUBCASE("exterior normalization is enforced") {
    CHECK_THROWS_AS(MediumField::from_fields(Field(g, 2.0), Field(g, 1.0)), std::invalid_argument);
  }
}

TEST_CASE("build_initial_pressure examples") {
  const Grid2D g = Grid2D::covering_unit_disk(0.01, 20);
  SUBCASE("disk radius 0.3") {
    PhantomSpec s;
    s.primitives.push_back({PrimitiveShape::disk, PhantomTarget::f, 0.0, 0.0, 0.3, 0.0, 1.0, 0.0});
    const InitialPressure f = build_initial_pressure(s, g);
    CHECK(std::abs(f.support_radius - 0.3) <= g.dx);
    CHECK(f.values.min() >= 0.0);
  }
  SUBCASE("support touching the margin is rejected") {
    PhantomSpec s;
    s.primitives.push_back({PrimitiveShape::disk, PhantomTarget::f, 0.9, 0.0, 0.2, 0.0, 1.0, 0.0});
    CHECK_THROWS_AS(build_initial_pressure(s, g), std::invalid_argument);
  }
  SUBCASE("raster source") {
    const auto dir = std::filesystem::temp_directory_path() / "pat_test_medium";
    std::filesystem::create_directories(dir);
    GrayImage img;
    img.width = img.height = 64;
    img.maxval = 255;
    img.pixels.resize(64 * 64);
    for (std::size_t r = 0; r < 64; ++r)
      for (std::size_t c = 0; c < 64; ++c) img.pixels[r * 64 + c] = static_cast<std::uint16_t>((r * 7 + c * 3) % 256);
    img.pixels[32 * 64 + 32] = 255;
    write_pgm((dir / "img.pgm").string(), img);
    const PhantomSpec s = PhantomSpec::parse("name = r\n[raster]\npath = img.pgm\nrange = 0, 1\n", dir.string());
    const InitialPressure f = build_initial_pressure(s, g);
    CHECK(f.values.max() <= 1.0);
    CHECK(f.values.max() > 0.95);
    CHECK(f.values.min() >= 0.0);
    for (std::size_t j = 0; j < g.ny; ++j)
      for (std::size_t i = 0; i < g.nx; ++i)
        if (std::hypot(g.x(i), g.y(j)) > 0.95 + 1e-12) CHECK(f.values(i, j) == 0.0);
  }
}

TEST_CASE("phantom text format") {
  const PhantomSpec s = PhantomSpec::parse(
      "name = demo\n[primitive]\nshape = smooth-bump\nfield = f\ncenter = 0.1, -0.2\nradius = 0.3\namplitude = 2\n"
      "[primitive]\nshape = annulus\nfield = kappa\nradius = 0.5\ninner_radius = 0.3\namplitude = 1.5\nsmoothing = 0.02\n");
  REQUIRE(s.primitives.size() == 2);
  CHECK(s.name == "demo");
  CHECK(s.primitives[0].shape == PrimitiveShape::smooth_bump);
  CHECK(s.primitives[0].cy == -0.2);
  CHECK(s.primitives[1].target == PhantomTarget::kappa);
  CHECK(s.primitives[1].inner_radius == 0.3);
  CHECK_THROWS_AS(PhantomSpec::parse("[primitive]\nshape = hexagon\nradius = 1\namplitude = 1\n"), std::invalid_argument);
  CHECK_THROWS_AS(PhantomSpec::parse("[blob]\n"), std::invalid_argument);
  CHECK_THROWS_AS(PhantomSpec::builtin("nope"), std::invalid_argument);
}

TEST_CASE("weighted inner products") {
  const Grid2D g = small_grid();
  const MediumField fish = fish_medium(g);
  const Field u = random_omega_field(g, 3);
  const Field v = random_omega_field(g, 4);
  CHECK(inner_product_H1kr(Field(g), Field(g), fish) == 0.0);
  CHECK(rel_diff(inner_product_H1kr(u, v, fish), inner_product_H1kr(v, u, fish)) <= 1e-12);
  const MediumField hom = MediumField::homogeneous(g);
  CHECK(rel_diff(inner_product_H1kr(u, u, hom), norm_H1(u) * norm_H1(u)) <= 1e-12);
  // Bilinearity.
  const Field w = 2.0 * u - 3.0 * v;
  const double lhs = inner_product_H1kr(w, v, fish);
  const double rhs = 2.0 * inner_product_H1kr(u, v, fish) - 3.0 * inner_product_H1kr(v, v, fish);
  CHECK(std::abs(lhs - rhs) <= 1e-10 * std::abs(rhs));
  CHECK_THROWS_AS(inner_product_H1kr(u, Field(tiny_grid()), fish), std::invalid_argument);
}

TEST_CASE("rho seminorm") {
  const Grid2D g = Grid2D::covering_unit_disk(0.02, 10);
  const MediumField hom = MediumField::homogeneous(g);
  CHECK(seminorm_rho(Field(g, 3.5), hom) == 0.0);

  Field u(g);
  for (std::size_t j = 0; j < g.ny; ++j)
    for (std::size_t i = 0; i < g.nx; ++i) u(i, j) = g.x(i);
  const double side = static_cast<double>(g.nx - 1) * g.dx;
  CHECK(std::abs(seminorm_rho(u, hom) - side) <= 0.02 * side);

  const MediumField half = MediumField::from_fields(Field(g, 2.0), Field(g, 0.5));
  const Field r = random_omega_field(g, 9);
  CHECK(rel_diff(seminorm_rho(r, half), std::sqrt(2.0) * seminorm_rho(r, hom)) <= 1e-12);
}

TEST_CASE("norm equivalence on 200 random fields") {
  const Grid2D g = Grid2D::covering_unit_disk(0.04, 10);
  const MediumField m = fish_medium(g);
  const double lo = std::sqrt(std::min(m.kappa_min(), 1.0 / m.rho_max()));
  const double hi = std::sqrt(std::max(m.kappa_max(), 1.0 / m.rho_min()));
  for (std::uint64_t s = 0; s < 200; ++s) {
    const Field phi = random_smooth_field(g, 1000 + s, static_cast<int>(s % 9));
    const double n1 = norm_H1(phi);
    const double nkr = norm_H1kr(phi, m);
    CHECK((nkr - lo * n1) / nkr >= -1e-10);
    CHECK((hi * n1 - nkr) / nkr >= -1e-10);
  }
}

TEST_CASE("eikonal examples") {
  const Grid2D g = Grid2D::covering_unit_disk(0.02, 10);
  SUBCASE("unit slowness from the origin") {
    const EikonalField d = eikonal_distance(Field(g, 1.0), {{0.0, 0.0}});
    double worst = 0.0;
    for (std::size_t j = 0; j < g.ny; ++j)
      for (std::size_t i = 0; i < g.nx; ++i) worst = std::max(worst, std::abs(d.dist(i, j) - std::hypot(g.x(i), g.y(j))));
    CHECK(worst <= 3.0 * g.dx);
    CHECK(d.dist(g.nx / 2, g.ny / 2) == 0.0);
    CHECK(d.dist.min() >= 0.0);
  }
  SUBCASE("slowness 2 from the origin") {
    const EikonalField d = eikonal_distance(Field(g, 2.0), {{0.0, 0.0}});
    double worst = 0.0;
    for (std::size_t j = 0; j < g.ny; ++j)
      for (std::size_t i = 0; i < g.nx; ++i)
        worst = std::max(worst, std::abs(d.dist(i, j) - 2.0 * std::hypot(g.x(i), g.y(j))));
    CHECK(worst <= 6.0 * g.dx);
  }
  SUBCASE("piecewise medium vs Dijkstra") {
    const Grid2D c = Grid2D::covering_unit_disk(0.04, 4);
    Field s(c, 1.0);
    for (std::size_t j = 0; j < c.ny; ++j)
      for (std::size_t i = 0; i < c.nx; ++i) {
        if (c.x(i) > 0.2) s(i, j) = 2.0;
        if (std::hypot(c.x(i) + 0.4, c.y(j) - 0.3) < 0.3) s(i, j) = 1.5;
      }
    const std::size_t oi = c.nx / 2 - 10;
    const std::size_t oj = c.ny / 2 - 5;
    const EikonalField d = eikonal_distance(s, {{c.x(oi), c.y(oj)}});
    const Field ref = dijkstra(s, oi, oj);
    double worst = 0.0;
    for (std::size_t n = 0; n < c.size(); ++n) worst = std::max(worst, std::abs(d.dist[n] - ref[n]));
    CHECK(worst <= 5.0 * c.dx);
  }
  SUBCASE("monotone in slowness") {
    const MediumField fish = fish_medium(g);
    Field s1 = fish.slowness();
    Field s2 = s1;
    for (std::size_t j = 0; j < g.ny; ++j)
      for (std::size_t i = 0; i < g.nx; ++i)
        if (g.x(i) < 0.0) s2(i, j) *= 1.3;
    const EikonalField d1 = eikonal_distance(s1, {{0.3, 0.2}});
    const EikonalField d2 = eikonal_distance(s2, {{0.3, 0.2}});
    for (std::size_t n = 0; n < g.size(); ++n) CHECK(d2.dist[n] >= d1.dist[n] - 1e-14);
  }
}

TEST_CASE("T0 examples") {
  const Grid2D g = Grid2D::covering_unit_disk(0.01, 20);
  const Field centered = disk_f(g, 0.0, 0.0, 0.3);
  SUBCASE("unit slowness, full circle") {
    CHECK(std::abs(compute_T0(centered, Arc::full(), Field(g, 1.0)) - 1.0) <= 3.0 * g.dx);
  }
  SUBCASE("slowness 2, full circle") {
    CHECK(std::abs(compute_T0(centered, Arc::full(), Field(g, 2.0)) - 2.0) <= 6.0 * g.dx);
  }
  SUBCASE("lower half circle vs brute force") {
    const Field f = disk_f(g, 0.0, 0.5, 0.1);
    const double t0 = compute_T0(f, Arc::lower_half(), Field(g, 1.0));
    double ref = 0.0;
    for (std::size_t j = 0; j < g.ny; ++j)
      for (std::size_t i = 0; i < g.nx; ++i) {
        if (f(i, j) == 0.0) continue;
        double best = std::numeric_limits<double>::infinity();
        for (int q = 0; q <= 20000; ++q) {
          const double a = std::numbers::pi * (1.0 + q / 20000.0);
          best = std::min(best, std::hypot(g.x(i) - std::cos(a), g.y(j) - std::sin(a)));
        }
        ref = std::max(ref, best);
      }
    CHECK(std::abs(t0 - ref) <= 3.0 * g.dx);
  }
  SUBCASE("monotone under support growth") {
    const MediumField fish = fish_medium(g);
    const Field small = disk_f(g, 0.1, 0.0, 0.2);
    const Field large = disk_f(g, 0.1, 0.0, 0.4);
    CHECK(compute_T0(large, Arc::lower_half(), fish.slowness()) >=
          compute_T0(small, Arc::lower_half(), fish.slowness()));
  }
  SUBCASE("empty support is rejected") {
    CHECK_THROWS_AS(compute_T0(Field(g), Arc::full(), Field(g, 1.0)), std::invalid_argument);
  }
}
