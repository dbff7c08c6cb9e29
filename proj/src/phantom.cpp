#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <string_view>
#include <tuple>
#include <sstream>
#include <stdexcept>

#include "pat/keyvalue.hpp"
#include "pat/medium.hpp"
#include "pat/pgm.hpp"

namespace pat {

namespace {

PhantomTarget parse_target(const std::string& s) {
  if (s == "f" || s == "pressure") return PhantomTarget::f;
  if (s == "kappa") return PhantomTarget::kappa;
  if (s == "rho") return PhantomTarget::rho;
  throw std::invalid_argument("phantom: unknown field '" + s + "' (expected f, kappa or rho)");
}

PrimitiveShape parse_shape(const std::string& s) {
  if (s == "disk") return PrimitiveShape::disk;
  if (s == "smooth-bump" || s == "bump") return PrimitiveShape::smooth_bump;
  if (s == "annulus") return PrimitiveShape::annulus;
  throw std::invalid_argument("phantom: unknown shape '" + s + "'");
}

std::pair<double, double> parse_center(const KeyValueSection& sec) {
  const auto c = sec.get_doubles("center");
  if (c.empty()) return {0.0, 0.0};
  if (c.size() != 2) throw std::invalid_argument("phantom: center needs two coordinates");
  return {c[0], c[1]};
}

// Disk indicator blurred by a Gaussian of standard deviation w along the
// radial direction; exact 0/1 beyond five widths.
double soft_disk(double r, double radius, double w) {
  if (w <= 0.0) return r <= radius * (1.0 + 1e-12) ? 1.0 : 0.0;
  const double t = (r - radius) / w;
  if (t >= 5.0) return 0.0;
  if (t <= -5.0) return 1.0;
  return 0.5 * std::erfc(t / std::numbers::sqrt2);
}

double profile(const Primitive& p, double x, double y, double w) {
  const double r = std::hypot(x - p.cx, y - p.cy);
  switch (p.shape) {
    case PrimitiveShape::disk:
      return soft_disk(r, p.radius, w);
    case PrimitiveShape::smooth_bump: {
      const double s = r / p.radius;
      return s < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - s * s)) : 0.0;
    }
    case PrimitiveShape::annulus:
      return std::max(0.0, soft_disk(r, p.radius, w) - soft_disk(r, p.inner_radius, w));
  }
  return 0.0;
}

void validate_primitive(const Primitive& p) {
  if (!std::isfinite(p.amplitude) || !std::isfinite(p.cx) || !std::isfinite(p.cy)) {
    throw std::invalid_argument("phantom: non-finite primitive parameter");
  }
  if (!(p.radius > 0.0)) throw std::invalid_argument("phantom: primitive radius must be positive");
  if (p.smoothing < 0.0) throw std::invalid_argument("phantom: smoothing must be non-negative");
  if (p.shape == PrimitiveShape::annulus && !(p.inner_radius >= 0.0 && p.inner_radius < p.radius)) {
    throw std::invalid_argument("phantom: annulus needs 0 <= inner_radius < radius");
  }
  if (p.target != PhantomTarget::f && !(p.amplitude > 0.0)) {
    std::ostringstream msg;
    msg << "phantom: " << (p.target == PhantomTarget::kappa ? "kappa" : "rho") << " amplitude " << p.amplitude
        << " violates positivity";
    throw std::invalid_argument(msg.str());
  }
}

void paint_rasters(const PhantomSpec& spec, PhantomTarget target, Field& field, double edge_width) {
  const Grid2D& g = field.grid();
  for (const RasterSource& src : spec.rasters) {
    if (src.target != target) continue;
    if (target != PhantomTarget::f && !(src.lo > 0.0 && src.hi > 0.0)) {
      throw std::invalid_argument("phantom: raster value range violates positivity");
    }
    const GrayImage img = read_pgm(src.path);
    const double half = src.mask_radius;
    const double scale = static_cast<double>(std::max(img.width, img.height) - 1) / (2.0 * half);
    const double cc = 0.5 * static_cast<double>(img.width - 1);
    const double rc = 0.5 * static_cast<double>(img.height - 1);
    for (std::size_t j = 0; j < g.ny; ++j) {
      for (std::size_t i = 0; i < g.nx; ++i) {
        const double x = g.x(i);
        const double y = g.y(j);
        const double r = std::hypot(x, y);
        const double w = target == PhantomTarget::f ? (r < src.mask_radius ? 1.0 : 0.0)
                                                    : soft_disk(r, src.mask_radius - 5.0 * edge_width, edge_width);
        if (w == 0.0) continue;
        const double gray = img.sample(cc + x * scale, rc - y * scale) / img.maxval;
        const double value = src.lo + (src.hi - src.lo) * gray;
        field(i, j) += (value - field(i, j)) * w;
      }
    }
  }
}

Field paint(const PhantomSpec& spec, PhantomTarget target, const Grid2D& grid, double background) {
  Field out(grid, background);
  const double min_width = target == PhantomTarget::f ? 0.0 : 2.0 * grid.dx;
  for (const Primitive& p : spec.primitives) {
    validate_primitive(p);
    if (p.target != target) continue;
    const double w = std::max(p.smoothing, min_width);
    for (std::size_t j = 0; j < grid.ny; ++j) {
      for (std::size_t i = 0; i < grid.nx; ++i) {
        const double a = profile(p, grid.x(i), grid.y(j), w);
        if (a != 0.0) out(i, j) += (p.amplitude - out(i, j)) * a;
      }
    }
  }
  paint_rasters(spec, target, out, 2.0 * grid.dx);
  return out;
}

Primitive prim(PrimitiveShape shape, PhantomTarget target, double cx, double cy, double radius, double amplitude,
               double smoothing = 0.0, double inner = 0.0) {
  Primitive p;
  p.shape = shape;
  p.target = target;
  p.cx = cx;
  p.cy = cy;
  p.radius = radius;
  p.amplitude = amplitude;
  p.smoothing = smoothing;
  p.inner_radius = inner;
  return p;
}

}  // namespace

PhantomSpec PhantomSpec::parse(const std::string& text, const std::string& base_dir) {
  const KeyValueDocument doc = KeyValueDocument::parse(text);
  PhantomSpec spec;
  spec.name = doc.top.get_or("name", "unnamed");
  for (const KeyValueSection& sec : doc.sections) {
    if (sec.name == "primitive") {
      Primitive p;
      p.shape = parse_shape(sec.get_or("shape", "disk"));
      p.target = parse_target(sec.get_or("field", "f"));
      std::tie(p.cx, p.cy) = parse_center(sec);
      p.radius = sec.require_double("radius");
      p.inner_radius = sec.get_double("inner_radius", 0.0);
      p.amplitude = sec.require_double("amplitude");
      p.smoothing = sec.get_double("smoothing", 0.0);
      validate_primitive(p);
      spec.primitives.push_back(p);
    } else if (sec.name == "raster") {
      RasterSource r;
      const std::string path = sec.get_or("path", "");
      if (path.empty()) throw std::invalid_argument("phantom: raster block needs a path");
      r.path = std::filesystem::path(path).is_absolute() ? path : (std::filesystem::path(base_dir) / path).string();
      r.target = parse_target(sec.get_or("field", "f"));
      const auto range = sec.get_doubles("range");
      if (!range.empty()) {
        if (range.size() != 2) throw std::invalid_argument("phantom: range needs two values");
        r.lo = range[0];
        r.hi = range[1];
      }
      r.mask_radius = sec.get_double("mask_radius", 0.95);
      spec.rasters.push_back(r);
    } else {
      throw std::invalid_argument("phantom: unknown block [" + sec.name + "] at line " + std::to_string(sec.line));
    }
  }
  return spec;
}

PhantomSpec PhantomSpec::load(const std::string& path) {
  std::ifstream probe(path);
  if (!probe) throw std::runtime_error("phantom: cannot open '" + path + "'");
  std::ostringstream ss;
  ss << probe.rdbuf();
  return parse(ss.str(), std::filesystem::path(path).parent_path().string());
}

PhantomSpec PhantomSpec::builtin(const std::string& name) {
  using S = PrimitiveShape;
  using T = PhantomTarget;
  PhantomSpec s;
  s.name = name;
  if (name == "empty") return s;
  if (name == "bump") {
    s.primitives.push_back(prim(S::smooth_bump, T::f, 0.0, 0.0, 0.3, 1.0));
    return s;
  }
  if (name == "mandrill") {
    // Face-like absorber with mildly varying kappa and rho.
    s.primitives = {
        prim(S::disk, T::f, 0.0, 0.0, 0.55, 0.35, 0.03),
        prim(S::disk, T::f, -0.22, 0.2, 0.1, 1.0, 0.015),
        prim(S::disk, T::f, 0.22, 0.2, 0.1, 1.0, 0.015),
        prim(S::smooth_bump, T::f, 0.0, -0.05, 0.16, 0.8),
        prim(S::annulus, T::f, 0.0, -0.3, 0.2, 0.7, 0.015, 0.13),
        prim(S::smooth_bump, T::kappa, 0.3, 0.3, 0.45, 1.6),
        prim(S::smooth_bump, T::kappa, -0.35, -0.2, 0.4, 1.3),
        prim(S::smooth_bump, T::rho, -0.2, 0.35, 0.4, 0.7),
        prim(S::smooth_bump, T::rho, 0.3, -0.3, 0.4, 0.8),
    };
    return s;
  }
  if (name == "fish") {
    // Water-like body with a swim-bladder inclusion: 1 <= kappa <= 14.3,
    // 0.02 <= rho <= 1.
    s.primitives = {
        prim(S::disk, T::f, 0.0, 0.0, 0.5, 0.4, 0.03),
        prim(S::disk, T::f, 0.32, 0.1, 0.08, 1.0, 0.015),
        prim(S::annulus, T::f, -0.05, -0.05, 0.3, 0.8, 0.015, 0.24),
        prim(S::disk, T::kappa, 0.0, 0.0, 0.5, 1.2, 0.03),
        prim(S::disk, T::rho, 0.0, 0.0, 0.5, 0.9, 0.03),
        prim(S::disk, T::kappa, -0.05, -0.05, 0.16, 14.3, 0.02),
        prim(S::disk, T::rho, -0.05, -0.05, 0.16, 0.02, 0.02),
    };
    return s;
  }
  if (name == "smooth") {
    // Smooth, non-trapping medium.
    s.primitives = {
        prim(S::smooth_bump, T::f, -0.2, 0.1, 0.3, 1.0),
        prim(S::smooth_bump, T::f, 0.25, -0.2, 0.25, 0.7),
        prim(S::smooth_bump, T::kappa, 0.1, 0.0, 0.6, 1.5),
        prim(S::smooth_bump, T::rho, -0.1, 0.1, 0.6, 0.8),
    };
    return s;
  }
  throw std::invalid_argument("phantom: unknown built-in '" + name + "'");
}

PhantomSpec PhantomSpec::resolve(const std::string& ref) {
  constexpr std::string_view prefix = "builtin:";
  if (ref.rfind(prefix, 0) == 0) return builtin(ref.substr(prefix.size()));
  return load(ref);
}

MediumField build_medium(const PhantomSpec& spec, const Grid2D& grid) {
  grid.validate();
  Field kappa = paint(spec, PhantomTarget::kappa, grid, 1.0);
  Field rho = paint(spec, PhantomTarget::rho, grid, 1.0);
  for (std::size_t j = 0; j < grid.ny; ++j) {
    for (std::size_t i = 0; i < grid.nx; ++i) {
      if (!grid.in_omega(i, j)) {
        kappa(i, j) = 1.0;
        rho(i, j) = 1.0;
      }
    }
  }
  return MediumField::from_fields(std::move(kappa), std::move(rho));
}

InitialPressure build_initial_pressure(const PhantomSpec& spec, const Grid2D& grid, double margin) {
  grid.validate();
  return InitialPressure::from_field(paint(spec, PhantomTarget::f, grid, 0.0), margin);
}

}  // namespace pat
