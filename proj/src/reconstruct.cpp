#include "pat/reconstruct.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace pat {

std::string to_string(ReconMethod m) {
  switch (m) {
    case ReconMethod::time_reversal: return "tr";
    case ReconMethod::neumann: return "neumann";
    case ReconMethod::landweber: return "landweber";
  }
  return "?";
}

std::string to_string(StopReason r) {
  switch (r) {
    case StopReason::k_max: return "k_max";
    case StopReason::discrepancy: return "discrepancy";
    case StopReason::stagnation: return "stagnation";
  }
  return "?";
}

ReconMethod parse_method(const std::string& s) {
  if (s == "tr" || s == "time_reversal") return ReconMethod::time_reversal;
  if (s == "neumann") return ReconMethod::neumann;
  if (s == "landweber") return ReconMethod::landweber;
  throw std::invalid_argument("unknown reconstruction method '" + s + "' (expected tr, neumann or landweber)");
}

void ReconConfig::validate() const {
  if (omega && !(*omega > 0.0 && std::isfinite(*omega))) throw std::invalid_argument("omega must be positive");
  if (!(tau > 1.0)) throw std::invalid_argument("tau must exceed 1");
  if (k_max < 1) throw std::invalid_argument("k_max must be at least 1");
  if (!(delta >= 0.0) || !std::isfinite(delta)) throw std::invalid_argument("delta must be finite and >= 0");
  if (!(taper_width >= 0.0)) throw std::invalid_argument("taper width must be >= 0");
  if (!(T_multiple > 0.0)) throw std::invalid_argument("T multiple must be positive");
  if (power_iters < 5) throw std::invalid_argument("power iteration count must be at least 5");
}

ReconContext::ReconContext(const MediumField& medium, const TimeAxis& axis, const DetectorArray& detectors,
                           EllipticSettings elliptic, double taper_width)
    : solver_(medium, axis, detectors),
      elliptic_(medium, elliptic),
      ring_(elliptic_.domain(), detectors.angles),
      taper_width_(taper_width) {}

ReconContext ReconContext::for_data(const MediumField& medium, const Sinogram& m, EllipticSettings elliptic,
                                    double taper_width) {
  return ReconContext(medium, TimeAxis{m.n_t, m.dt, m.T}, m.detectors(), elliptic, taper_width);
}

void ReconContext::check_layout(const Sinogram& h) const {
  if (!solver_.axis().matches(h)) throw std::invalid_argument("time reversal: data time grid differs from solver");
  if (h.angles != solver_.detectors().angles || !(h.arc == solver_.detectors().arc))
    throw std::invalid_argument("time reversal: detector layout differs from solver");
}

Sinogram ReconContext::prepare(const Sinogram& h) const {
  if (!partial() || solver_.detectors().active_count() == 0) return h;
  return extend_partial_data(h, taper_width_);
}

Field ReconContext::time_reverse(const Sinogram& h, const Field* initial) const {
  check_layout(h);
  const OmegaDomain& d = elliptic_.domain();
  const std::size_t n_int = d.interior_count();
  const std::size_t n_all = n_int + d.ring_count();
  const std::size_t N = h.n_t;
  const double dt = solver_.axis().dt;
  const double h2 = d.grid().dx * d.grid().dx;
  std::vector<double> coef(n_int);
  for (std::size_t c = 0; c < n_int; ++c) coef[c] = dt * dt / (d.kappa(c) * h2);

  std::vector<double> next(n_all, 0.0), cur(n_all, 0.0), lap(n_int);
  auto set_ring = [&](std::vector<double>& z, std::size_t level) {
    std::span<double> ring(z.data() + n_int, d.ring_count());
    if (level == 0) {
      std::fill(ring.begin(), ring.end(), 0.0);
    } else {
      ring_.interpolate_column(h.samples, N, level - 1, ring);
    }
  };

  if (initial) {
    const std::vector<double> zi = d.gather_interior(*initial);
    std::copy(zi.begin(), zi.end(), next.begin());
  }
  set_ring(next, N);
  d.apply_stiffness(next, lap);
  for (std::size_t c = 0; c < n_int; ++c) cur[c] = next[c] - 0.5 * coef[c] * lap[c];
  set_ring(cur, N - 1);
  for (std::size_t n = N - 1; n >= 1; --n) {
    d.apply_stiffness(cur, lap);
    for (std::size_t c = 0; c < n_int; ++c) next[c] = 2.0 * cur[c] - next[c] - coef[c] * lap[c];
    std::swap(next, cur);
    set_ring(cur, n - 1);
    if ((n & 255) == 0) {
      for (std::size_t c = 0; c < n_int; ++c)
        if (!std::isfinite(cur[c])) {
          std::ostringstream msg;
          msg << "time reversal became non-finite at step " << n;
          throw NumericalError(msg.str());
        }
    }
  }
  return d.scatter_interior(std::span<const double>(cur.data(), n_int));
}

Field ReconContext::modified_time_reverse(const Sinogram& h) const {
  check_layout(h);
  std::vector<double> last(h.n_det);
  for (std::size_t dd = 0; dd < h.n_det; ++dd) last[dd] = h.at(dd, h.n_t - 1);
  const Field phi = elliptic_.harmonic_extension(last, h.angles);
  return time_reverse(h, &phi);
}

Sinogram extend_partial_data(const Sinogram& m, double taper_width) {
  m.validate();
  if (!(taper_width >= 0.0)) throw std::invalid_argument("extend_partial_data: taper width must be >= 0");
  std::size_t n_active = 0;
  for (std::size_t d = 0; d < m.n_det; ++d) n_active += m.active(d) ? 1 : 0;
  if (n_active == 0) throw std::invalid_argument("extend_partial_data: no active detector");

  Sinogram out = m;
  if (!m.arc.is_full()) {
    const double len = m.arc.length();
    if (taper_width > 0.5 * len)
      throw std::invalid_argument("extend_partial_data: taper wider than half the arc");
    // Edge detectors of the shrunk arc.
    std::size_t first = m.n_det, last = m.n_det;
    double first_off = kTwoPi, last_off = -1.0;
    for (std::size_t d = 0; d < m.n_det; ++d) {
      if (!m.active(d)) continue;
      const double o = m.arc.offset(m.angles[d]);
      if (o >= taper_width && o <= len - taper_width) {
        if (o < first_off) first_off = o, first = d;
        if (o > last_off) last_off = o, last = d;
      }
    }
    if (first == m.n_det) throw std::invalid_argument("extend_partial_data: no detector left inside the taper");
    for (std::size_t d = 0; d < m.n_det; ++d) {
      double w = 0.0;
      std::size_t src = d;
      if (m.active(d)) {
        const double o = m.arc.offset(m.angles[d]);
        if (o < taper_width) {
          w = 0.5 * (1.0 - std::cos(std::numbers::pi * o / taper_width));
          src = first;
        } else if (o > len - taper_width) {
          w = 0.5 * (1.0 - std::cos(std::numbers::pi * (len - o) / taper_width));
          src = last;
        } else {
          w = 1.0;
        }
      }
      for (std::size_t k = 0; k < m.n_t; ++k) out.at(d, k) = w == 1.0 ? m.at(src, k) : w * m.at(src, k);
    }
  }
  // Temporal end taper.
  const double t_start = 0.95 * m.T;
  const double width = 0.05 * m.T;
  std::size_t k_edge = 0;
  bool have_edge = false;
  for (std::size_t k = 0; k < m.n_t; ++k)
    if (static_cast<double>(k + 1) * m.dt <= t_start) k_edge = k, have_edge = true;
  for (std::size_t k = 0; k < m.n_t; ++k) {
    const double t = static_cast<double>(k + 1) * m.dt;
    if (t <= t_start) continue;
    const double w = 0.5 * (1.0 + std::cos(std::numbers::pi * std::min(1.0, (t - t_start) / width)));
    for (std::size_t d = 0; d < m.n_det; ++d) out.at(d, k) = have_edge ? w * out.at(d, k_edge) : 0.0;
  }
  return out;
}

Field time_reverse(const Sinogram& h, const ReconContext& ctx, const Field* initial) {
  return ctx.time_reverse(h, initial);
}

Field modified_time_reverse(const Sinogram& h, const ReconContext& ctx) { return ctx.modified_time_reverse(h); }

namespace {

void record(ReconResult& r, const Field& f, double residual, const ErrorFn& error) {
  r.residual_history.push_back(residual);
  if (error) r.error_history.push_back(error(f));
}

}  // namespace

ReconResult reconstruct_time_reversal(const Sinogram& m, const ReconContext& ctx, const ErrorFn& error) {
  ReconResult r;
  r.f_rec = ctx.time_reverse(ctx.prepare(m));
  record(r, r.f_rec, norm_sigma(ctx.forward(r.f_rec) - m), error);
  return r;
}

ReconResult reconstruct_neumann(const Sinogram& m, const ReconContext& ctx, std::size_t k, const ErrorFn& error) {
  ReconResult r;
  Field f = ctx.modified_time_reverse(ctx.prepare(m));
  Sinogram res = ctx.forward(f) - m;
  record(r, f, norm_sigma(res), error);
  for (std::size_t j = 1; j <= k; ++j) {
    f -= ctx.modified_time_reverse(ctx.prepare(res));
    res = ctx.forward(f) - m;
    r.iterations = j;
    record(r, f, norm_sigma(res), error);
    if (r.residual_history.back() > 10.0 * r.residual_history.front()) {
      r.diverged = true;
      break;
    }
  }
  r.f_rec = std::move(f);
  return r;
}

ReconResult reconstruct_landweber(const Sinogram& m, const ReconContext& ctx, const ReconConfig& config,
                                  const ErrorFn& error) {
  config.validate();
  ReconResult r;
  if (config.omega) {
    r.omega = *config.omega;
  } else {
    const NormEstimate est = operator_norm_estimate(ctx.solver(), ctx.elliptic(), config.power_iters, config.seed);
    if (!(est.value > 0.0)) throw std::invalid_argument("landweber: operator norm is zero (no active detector?)");
    r.omega = 0.9 / (est.value * est.value);
    r.norm_warning = !est.converged;
  }
  Field f(ctx.medium().grid());
  Sinogram res = m;
  res *= -1.0;
  record(r, f, norm_sigma(res), error);
  const double r0 = r.residual_history.front();
  const double target = config.tau * config.delta;
  if (config.delta > 0.0 && r0 <= target) {
    r.stop_reason = StopReason::discrepancy;
    r.f_rec = std::move(f);
    return r;
  }
  for (std::size_t k = 1; k <= config.k_max; ++k) {
    f.axpy(-r.omega, adjoint_H1(res, ctx.solver(), ctx.elliptic()));
    res = ctx.forward(f) - m;
    r.iterations = k;
    record(r, f, norm_sigma(res), error);
    const double rk = r.residual_history.back();
    if (!std::isfinite(rk) || rk > 10.0 * r0) {
      std::ostringstream msg;
      msg << "landweber residual diverged at iteration " << k << " (" << rk << " vs initial " << r0
          << "); omega = " << r.omega << " is too large";
      throw NumericalError(msg.str());
    }
    if (config.delta > 0.0 && rk <= target) {
      r.stop_reason = StopReason::discrepancy;
      break;
    }
    if (k >= 5) {
      const double before = r.residual_history[k - 5];
      if (before == 0.0 || std::abs(before - rk) / before < 1e-8) {
        r.stop_reason = StopReason::stagnation;
        break;
      }
    }
  }
  r.f_rec = std::move(f);
  return r;
}

ReconResult reconstruct(const Sinogram& m, const ReconContext& ctx, const ReconConfig& config,
                        const ErrorFn& error) {
  config.validate();
  switch (config.method) {
    case ReconMethod::time_reversal: return reconstruct_time_reversal(m, ctx, error);
    case ReconMethod::neumann: return reconstruct_neumann(m, ctx, config.k_max, error);
    case ReconMethod::landweber: return reconstruct_landweber(m, ctx, config, error);
  }
  throw std::logic_error("unreachable");
}

double estimate_contraction(const ReconContext& ctx, const Field& start, std::size_t trials) {
  if (trials == 0) throw std::invalid_argument("estimate_contraction: trials must be positive");
  const MediumField& medium = ctx.medium();
  Field x = start;
  x.restrict_to_omega();
  double nx = norm_H1kr(x, medium);
  if (nx == 0.0) throw std::invalid_argument("estimate_contraction: zero start field");
  double ratio = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    Field y = x - ctx.modified_time_reverse(ctx.prepare(ctx.forward(x)));
    const double ny = norm_H1kr(y, medium);
    ratio = ny / nx;
    if (ny == 0.0) break;
    x = std::move(y);
    nx = ny;
  }
  return ratio;
}

double estimate_contraction(const ReconContext& ctx, std::size_t trials, std::uint64_t seed) {
  return estimate_contraction(ctx, random_smooth_field(ctx.medium().grid(), seed), trials);
}

}  // namespace pat
