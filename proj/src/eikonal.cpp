#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>
#include <sstream>
#include <stdexcept>

#include "pat/medium.hpp"

namespace pat {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// First-order fast marching. `dist` holds initial values (finite on the
// source band, +inf elsewhere); band nodes keep their value.
void fast_march(const Field& slowness, Field& dist, const std::vector<char>& frozen) {
  const Grid2D& g = dist.grid();
  const double h = g.dx;
  std::vector<char> known(g.size(), 0);
  using Entry = std::pair<double, std::size_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
  for (std::size_t n = 0; n < g.size(); ++n)
    if (std::isfinite(dist[n])) heap.emplace(dist[n], n);

  auto local_update = [&](std::size_t i, std::size_t j) {
    auto val = [&](std::size_t ii, std::size_t jj) {
      const std::size_t n = g.index(ii, jj);
      return known[n] ? dist[n] : kInf;
    };
    const double a = std::min(i > 0 ? val(i - 1, j) : kInf, i + 1 < g.nx ? val(i + 1, j) : kInf);
    const double b = std::min(j > 0 ? val(i, j - 1) : kInf, j + 1 < g.ny ? val(i, j + 1) : kInf);
    const double sh = slowness(i, j) * h;
    if (!std::isfinite(a) && !std::isfinite(b)) return kInf;
    if (!std::isfinite(a) || !std::isfinite(b) || std::abs(a - b) >= sh) return std::min(a, b) + sh;
    return 0.5 * (a + b + std::sqrt(2.0 * sh * sh - (a - b) * (a - b)));
  };

  while (!heap.empty()) {
    const auto [d, n] = heap.top();
    heap.pop();
    if (known[n] || d > dist[n]) continue;
    known[n] = 1;
    const std::size_t i = n % g.nx;
    const std::size_t j = n / g.nx;
    const std::size_t nb[4][2] = {{i - 1, j}, {i + 1, j}, {i, j - 1}, {i, j + 1}};
    for (int k = 0; k < 4; ++k) {
      const std::size_t ii = nb[k][0];
      const std::size_t jj = nb[k][1];
      if (ii >= g.nx || jj >= g.ny) continue;  // wraps for i == 0
      const std::size_t m = g.index(ii, jj);
      if (known[m] || frozen[m]) continue;
      const double cand = local_update(ii, jj);
      if (cand < dist[m]) {
        dist[m] = cand;
        heap.emplace(cand, m);
      }
    }
  }
}

void require_positive(const Field& slowness) {
  for (std::size_t n = 0; n < slowness.size(); ++n)
    if (!(slowness[n] > 0.0) || !std::isfinite(slowness[n]))
      throw std::invalid_argument("eikonal: slowness must be positive and finite");
}

}  // namespace

EikonalField eikonal_distance(const Field& slowness, const std::vector<Point2>& sources) {
  if (sources.empty()) throw std::invalid_argument("eikonal: empty source set");
  require_positive(slowness);
  const Grid2D& g = slowness.grid();
  Field dist(g, kInf);
  std::vector<char> frozen(g.size(), 0);
  // Nodes within two cells of a source start from the straight-line travel
  // time with the local slowness.
  for (const Point2& p : sources) {
    const double fi = (p.x - g.origin_x) / g.dx;
    const double fj = (p.y - g.origin_y) / g.dx;
    if (fi < 0 || fj < 0 || fi > static_cast<double>(g.nx - 1) || fj > static_cast<double>(g.ny - 1)) {
      throw std::invalid_argument("eikonal: source outside the grid");
    }
    const auto i0 = static_cast<long>(std::floor(fi));
    const auto j0 = static_cast<long>(std::floor(fj));
    for (long j = j0 - 1; j <= j0 + 2; ++j) {
      for (long i = i0 - 1; i <= i0 + 2; ++i) {
        if (i < 0 || j < 0 || i >= static_cast<long>(g.nx) || j >= static_cast<long>(g.ny)) continue;
        const auto ui = static_cast<std::size_t>(i);
        const auto uj = static_cast<std::size_t>(j);
        const double r = std::hypot(g.x(ui) - p.x, g.y(uj) - p.y);
        if (r > 1.5 * g.dx) continue;
        const std::size_t n = g.index(ui, uj);
        dist[n] = std::min(dist[n], r * slowness[n]);
        frozen[n] = 1;
      }
    }
  }
  fast_march(slowness, dist, frozen);
  std::ostringstream desc;
  desc << sources.size() << " point source(s)";
  return EikonalField{std::move(dist), desc.str()};
}

EikonalField eikonal_distance(const MediumField& medium, const std::vector<Point2>& sources) {
  return eikonal_distance(medium.slowness(), sources);
}

EikonalField eikonal_from_nodes(const Field& slowness, const Field& mask) {
  require_same_grid(slowness.grid(), mask.grid(), "eikonal_from_nodes");
  require_positive(slowness);
  const Grid2D& g = slowness.grid();
  Field dist(g, kInf);
  std::vector<char> frozen(g.size(), 0);
  bool any = false;
  for (std::size_t n = 0; n < g.size(); ++n) {
    if (mask[n] != 0.0) {
      dist[n] = 0.0;
      frozen[n] = 1;
      any = true;
    }
  }
  if (!any) throw std::invalid_argument("eikonal: empty source set");
  fast_march(slowness, dist, frozen);
  return EikonalField{std::move(dist), "node set"};
}

EikonalField eikonal_from_arc(const Field& slowness, const Arc& arc) {
  require_positive(slowness);
  const Grid2D& g = slowness.grid();
  Field dist(g, kInf);
  std::vector<char> frozen(g.size(), 0);
  for (std::size_t j = 0; j < g.ny; ++j) {
    for (std::size_t i = 0; i < g.nx; ++i) {
      const double r = arc.distance(g.x(i), g.y(j));
      if (r <= 1.5 * g.dx) {
        const std::size_t n = g.index(i, j);
        dist[n] = r * slowness[n];
        frozen[n] = 1;
      }
    }
  }
  fast_march(slowness, dist, frozen);
  std::ostringstream desc;
  desc << "arc [" << arc.start << ", " << arc.end << "]";
  return EikonalField{std::move(dist), desc.str()};
}

double compute_T0(const Field& f, const Arc& arc, const Field& slowness) {
  require_same_grid(f.grid(), slowness.grid(), "compute_T0");
  const EikonalField d = eikonal_from_arc(slowness, arc);
  double t0 = -1.0;
  for (std::size_t n = 0; n < f.size(); ++n)
    if (f[n] != 0.0) t0 = std::max(t0, d.dist[n]);
  if (t0 < 0.0) throw std::invalid_argument("compute_T0: initial pressure has empty support");
  return t0;
}

double compute_T0(const InitialPressure& f, const Arc& arc, const MediumField& medium) {
  return compute_T0(f.values, arc, medium.slowness());
}

double exit_time_surrogate(const MediumField& medium) {
  const EikonalField d = eikonal_from_arc(medium.slowness(), Arc::full());
  const Grid2D& g = medium.grid();
  double m = 0.0;
  for (std::size_t j = 0; j < g.ny; ++j)
    for (std::size_t i = 0; i < g.nx; ++i)
      if (g.in_omega(i, j)) m = std::max(m, d.dist(i, j));
  return 2.0 * m;
}

}  // namespace pat
