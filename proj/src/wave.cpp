#include "pat/wave.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace pat {

// ---------------------------------------------------------------------------
// Detectors and sinograms

DetectorArray DetectorArray::uniform(std::size_t n_det, const Arc& arc) {
  if (n_det == 0) throw std::invalid_argument("detectors: n_det must be positive");
  DetectorArray d;
  d.arc = arc;
  d.angles.resize(n_det);
  for (std::size_t k = 0; k < n_det; ++k) d.angles[k] = kTwoPi * static_cast<double>(k) / static_cast<double>(n_det);
  d.validate();
  return d;
}

void DetectorArray::validate() const {
  if (angles.empty()) throw std::invalid_argument("detectors: empty array");
  for (std::size_t k = 0; k < angles.size(); ++k) {
    if (!(angles[k] >= 0.0 && angles[k] < kTwoPi)) throw std::invalid_argument("detectors: angle outside [0, 2pi)");
    if (k > 0 && !(angles[k] > angles[k - 1])) throw std::invalid_argument("detectors: angles must be strictly increasing");
  }
  if (!(arc.end > arc.start)) throw std::invalid_argument("detectors: arc end must exceed arc start");
  // Active detectors must form one contiguous run (cyclically).
  std::size_t transitions = 0;
  for (std::size_t k = 0; k < angles.size(); ++k) {
    if (active(k) != active((k + 1) % angles.size())) ++transitions;
  }
  if (transitions > 2) throw std::invalid_argument("detectors: active set is not a contiguous arc");
}

std::size_t DetectorArray::active_count() const {
  std::size_t n = 0;
  for (std::size_t d = 0; d < size(); ++d) n += active(d) ? 1 : 0;
  return n;
}

std::vector<double> DetectorArray::weights() const {
  const std::size_t n = size();
  std::vector<double> w(n, 0.0);
  if (n == 1) {
    w[0] = active(0) ? kTwoPi : 0.0;
    return w;
  }
  for (std::size_t d = 0; d < n; ++d) {
    if (!active(d)) continue;
    const double next = d + 1 < n ? angles[d + 1] : angles[0] + kTwoPi;
    const double prev = d > 0 ? angles[d - 1] : angles[n - 1] - kTwoPi;
    w[d] = 0.5 * (next - prev);
  }
  return w;
}

std::vector<BilinearStencil> detector_stencils(const Grid2D& grid, const DetectorArray& detectors) {
  std::vector<BilinearStencil> out(detectors.size());
  for (std::size_t d = 0; d < detectors.size(); ++d) {
    const double px = std::cos(detectors.angles[d]);
    const double py = std::sin(detectors.angles[d]);
    const double fx = (px - grid.origin_x) / grid.dx;
    const double fy = (py - grid.origin_y) / grid.dx;
    const auto i0 = static_cast<std::size_t>(std::floor(fx));
    const auto j0 = static_cast<std::size_t>(std::floor(fy));
    const double tx = fx - static_cast<double>(i0);
    const double ty = fy - static_cast<double>(j0);
    out[d].nodes = {grid.index(i0, j0), grid.index(i0 + 1, j0), grid.index(i0, j0 + 1), grid.index(i0 + 1, j0 + 1)};
    out[d].weights = {(1 - tx) * (1 - ty), tx * (1 - ty), (1 - tx) * ty, tx * ty};
  }
  return out;
}

Sinogram Sinogram::zeros(const DetectorArray& detectors, std::size_t n_t, double dt) {
  Sinogram s;
  s.n_det = detectors.size();
  s.n_t = n_t;
  s.dt = dt;
  s.T = static_cast<double>(n_t) * dt;
  s.arc = detectors.arc;
  s.angles = detectors.angles;
  s.samples.assign(s.n_det * n_t, 0.0);
  return s;
}

double Sinogram::max_abs() const {
  double m = 0.0;
  for (double v : samples) m = std::max(m, std::abs(v));
  return m;
}

bool Sinogram::compatible(const Sinogram& o) const {
  return n_det == o.n_det && n_t == o.n_t && std::abs(dt - o.dt) <= 1e-12 * dt && arc == o.arc && angles == o.angles;
}

Sinogram& Sinogram::operator+=(const Sinogram& o) {
  if (!compatible(o)) throw std::invalid_argument("sinogram: incompatible layout or time grid");
  for (std::size_t n = 0; n < samples.size(); ++n) samples[n] += o.samples[n];
  return *this;
}

Sinogram& Sinogram::operator-=(const Sinogram& o) {
  if (!compatible(o)) throw std::invalid_argument("sinogram: incompatible layout or time grid");
  for (std::size_t n = 0; n < samples.size(); ++n) samples[n] -= o.samples[n];
  return *this;
}

Sinogram& Sinogram::operator*=(double s) {
  for (double& v : samples) v *= s;
  return *this;
}

Sinogram operator-(Sinogram a, const Sinogram& b) { return a -= b; }

void Sinogram::validate() const {
  if (n_det == 0 || n_t == 0) throw std::invalid_argument("sinogram: empty dimensions");
  if (angles.size() != n_det) throw std::invalid_argument("sinogram: angle count does not match n_det");
  if (samples.size() != n_det * n_t) throw std::invalid_argument("sinogram: payload size mismatch");
  if (!(dt > 0.0) || !std::isfinite(T)) throw std::invalid_argument("sinogram: invalid time step");
  if (std::abs(static_cast<double>(n_t) * dt - T) > dt) throw std::invalid_argument("sinogram: n_t*dt differs from T by more than dt");
  for (double v : samples)
    if (!std::isfinite(v)) throw std::invalid_argument("sinogram: non-finite sample");
  detectors().validate();
  for (std::size_t d = 0; d < n_det; ++d) {
    if (active(d)) continue;
    for (std::size_t k = 0; k < n_t; ++k)
      if (at(d, k) != 0.0) throw std::invalid_argument("sinogram: inactive detector row is not zero");
  }
}

double inner_product_sigma(const Sinogram& a, const Sinogram& b) {
  if (!a.compatible(b)) throw std::invalid_argument("inner_product_sigma: incompatible sinograms");
  const std::vector<double> w = a.detectors().weights();
  double total = 0.0;
  for (std::size_t d = 0; d < a.n_det; ++d) {
    if (w[d] == 0.0) continue;
    double row = 0.0;
    for (std::size_t k = 0; k < a.n_t; ++k) row += a.at(d, k) * b.at(d, k);
    total += w[d] * row;
  }
  return total * a.dt;
}

double norm_sigma(const Sinogram& a) { return std::sqrt(inner_product_sigma(a, a)); }

Sinogram resample_time(const Sinogram& s, std::size_t n_t) {
  if (n_t == 0) throw std::invalid_argument("resample_time: n_t must be positive");
  Sinogram out = Sinogram::zeros(s.detectors(), n_t, s.T / static_cast<double>(n_t));
  out.T = s.T;
  for (std::size_t d = 0; d < s.n_det; ++d) {
    for (std::size_t k = 0; k < n_t; ++k) {
      // Source sample m sits at (m+1)*dt; the value at t = 0 is taken as 0.
      const double t = static_cast<double>(k + 1) * out.dt;
      const double pos = t / s.dt - 1.0;
      if (pos <= -1.0) continue;
      const double fl = std::floor(pos);
      const double w = pos - fl;
      const long m0 = static_cast<long>(fl);
      const double v0 = m0 >= 0 ? s.at(d, static_cast<std::size_t>(std::min<long>(m0, static_cast<long>(s.n_t) - 1))) : 0.0;
      const long m1 = std::min<long>(m0 + 1, static_cast<long>(s.n_t) - 1);
      const double v1 = m1 >= 0 ? s.at(d, static_cast<std::size_t>(m1)) : 0.0;
      out.at(d, k) = (1.0 - w) * v0 + w * v1;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Time axis

TimeAxis TimeAxis::for_medium(const MediumField& medium, double T, double dt_divisor) {
  if (!(T > 0.0) || !std::isfinite(T)) throw std::invalid_argument("time axis: T must be positive");
  if (!(dt_divisor > 0.0)) throw std::invalid_argument("time axis: dt divisor must be positive");
  const double dx = medium.grid().dx;
  const double dt0 = dx / (dt_divisor * medium.c_max());
  const double limit = 0.5 * dx / (std::sqrt(2.0) * medium.c_max());
  if (dt0 > limit * (1.0 + 1e-12)) {
    std::ostringstream msg;
    msg << "time axis: CFL violation, dt = " << dt0 << " exceeds " << limit << " (dt divisor must be >= "
        << 2.0 * std::sqrt(2.0) << ")";
    throw std::invalid_argument(msg.str());
  }
  TimeAxis a;
  a.n_t = static_cast<std::size_t>(std::ceil(T / dt0 - 1e-9));
  a.n_t = std::max<std::size_t>(a.n_t, 1);
  a.dt = T / static_cast<double>(a.n_t);
  a.T = T;
  return a;
}

bool TimeAxis::matches(const Sinogram& s) const {
  return s.n_t == n_t && std::abs(s.dt - dt) <= 1e-12 * dt;
}

// ---------------------------------------------------------------------------
// Solver

struct WaveSolver::State {
  std::vector<double> px, py, vx, vy;
};

WaveSolver::WaveSolver(const MediumField& medium, const TimeAxis& axis, const DetectorArray& detectors,
                       const PmlSettings& pml)
    : medium_(medium), axis_(axis), detectors_(detectors) {
  detectors_.validate();
  const Grid2D& g = medium_.grid();
  if (axis_.n_t == 0 || !(axis_.dt > 0.0)) throw std::invalid_argument("wave solver: invalid time axis");
  const double cfl = 0.5 * g.dx / (std::sqrt(2.0) * medium_.c_max());
  if (axis_.dt > cfl * (1.0 + 1e-12)) throw std::invalid_argument("wave solver: CFL violation");
  if (!(pml.reflection > 0.0 && pml.reflection < 1.0)) throw std::invalid_argument("wave solver: PML reflection must lie in (0,1)");

  stencils_ = detector_stencils(g, detectors_);
  active_.resize(detectors_.size());
  for (std::size_t d = 0; d < detectors_.size(); ++d) active_[d] = detectors_.active(d) ? 1 : 0;

  const double dt = axis_.dt;
  const double dx = g.dx;
  const auto width = static_cast<double>(g.pml_width);
  // Quadratic profile; the exterior sound speed is 1.
  const double sigma_max = g.pml_width > 0 ? 3.0 * std::log(1.0 / pml.reflection) / (2.0 * width * dx) : 0.0;
  auto sigma = [&](double pos, std::size_t n) {
    if (g.pml_width == 0) return 0.0;
    const double lo = width;
    const double hi = static_cast<double>(n - 1) - width;
    const double depth = std::max({0.0, lo - pos, pos - hi});
    const double r = depth / width;
    return sigma_max * r * r;
  };

  const std::size_t N = g.size();
  apx_.assign(N, 0.0);
  bpx_.assign(N, 0.0);
  apy_.assign(N, 0.0);
  bpy_.assign(N, 0.0);
  const Field& kappa = medium_.kappa();
  for (std::size_t j = 1; j + 1 < g.ny; ++j) {
    const double sy = sigma(static_cast<double>(j), g.ny);
    for (std::size_t i = 1; i + 1 < g.nx; ++i) {
      const double sx = sigma(static_cast<double>(i), g.nx);
      const std::size_t n = g.index(i, j);
      const double k = kappa[n];
      apx_[n] = (1.0 - 0.5 * sx * dt) / (1.0 + 0.5 * sx * dt);
      bpx_[n] = dt / (k * (1.0 + 0.5 * sx * dt) * dx);
      apy_[n] = (1.0 - 0.5 * sy * dt) / (1.0 + 0.5 * sy * dt);
      bpy_[n] = dt / (k * (1.0 + 0.5 * sy * dt) * dx);
    }
  }
  const auto& irx = medium_.inv_rho_x();
  const auto& iry = medium_.inv_rho_y();
  avx_.resize(irx.size());
  bvx_.resize(irx.size());
  cinit_x_.resize(irx.size());
  for (std::size_t j = 0; j < g.ny; ++j) {
    for (std::size_t i = 0; i + 1 < g.nx; ++i) {
      const std::size_t f = j * (g.nx - 1) + i;
      const double sx = sigma(static_cast<double>(i) + 0.5, g.nx);
      avx_[f] = (1.0 - 0.5 * sx * dt) / (1.0 + 0.5 * sx * dt);
      bvx_[f] = dt * irx[f] / ((1.0 + 0.5 * sx * dt) * dx);
      cinit_x_[f] = 0.5 * dt * irx[f] / dx;
    }
  }
  avy_.resize(iry.size());
  bvy_.resize(iry.size());
  cinit_y_.resize(iry.size());
  for (std::size_t j = 0; j + 1 < g.ny; ++j) {
    const double sy = sigma(static_cast<double>(j) + 0.5, g.ny);
    for (std::size_t i = 0; i < g.nx; ++i) {
      const std::size_t f = j * g.nx + i;
      avy_[f] = (1.0 - 0.5 * sy * dt) / (1.0 + 0.5 * sy * dt);
      bvy_[f] = dt * iry[f] / ((1.0 + 0.5 * sy * dt) * dx);
      cinit_y_[f] = 0.5 * dt * iry[f] / dx;
    }
  }
}

void WaveSolver::initialize(const Field& f, State& s) const {
  const Grid2D& g = grid();
  require_same_grid(f.grid(), g, "wave solver");
  s.px.assign(g.size(), 0.0);
  s.py.assign(g.size(), 0.0);
  for (std::size_t j = 1; j + 1 < g.ny; ++j) {
    for (std::size_t i = 1; i + 1 < g.nx; ++i) {
      const std::size_t n = g.index(i, j);
      s.px[n] = 0.5 * f[n];
      s.py[n] = 0.5 * f[n];
    }
  }
  // Velocity at t = -dt/2 such that the first step reproduces the
  // second-order Taylor start y1 = y0 + dt^2/(2 kappa) div(rho^-1 grad y0).
  s.vx.assign(cinit_x_.size(), 0.0);
  s.vy.assign(cinit_y_.size(), 0.0);
  const std::size_t nxf = g.nx - 1;
  for (std::size_t j = 0; j < g.ny; ++j)
    for (std::size_t i = 0; i < nxf; ++i) {
      const std::size_t a = g.index(i, j);
      s.vx[j * nxf + i] = cinit_x_[j * nxf + i] * ((s.px[a + 1] + s.py[a + 1]) - (s.px[a] + s.py[a]));
    }
  for (std::size_t j = 0; j + 1 < g.ny; ++j)
    for (std::size_t i = 0; i < g.nx; ++i) {
      const std::size_t a = g.index(i, j);
      s.vy[a] = cinit_y_[a] * ((s.px[a + g.nx] + s.py[a + g.nx]) - (s.px[a] + s.py[a]));
    }
}

void WaveSolver::step(State& s) const {
  const Grid2D& g = grid();
  const std::size_t nx = g.nx;
  const std::size_t ny = g.ny;
  const std::size_t nxf = nx - 1;
  double* px = s.px.data();
  double* py = s.py.data();
  double* vx = s.vx.data();
  double* vy = s.vy.data();

#pragma omp parallel for schedule(static)
  for (std::size_t j = 0; j < ny; ++j) {
    const double* prow_x = px + j * nx;
    const double* prow_y = py + j * nx;
    double* vrow = vx + j * nxf;
    const double* a = avx_.data() + j * nxf;
    const double* b = bvx_.data() + j * nxf;
    for (std::size_t i = 0; i < nxf; ++i) {
      const double dp = (prow_x[i + 1] + prow_y[i + 1]) - (prow_x[i] + prow_y[i]);
      vrow[i] = a[i] * vrow[i] - b[i] * dp;
    }
  }
#pragma omp parallel for schedule(static)
  for (std::size_t j = 0; j < ny - 1; ++j) {
    const double* p0x = px + j * nx;
    const double* p0y = py + j * nx;
    const double* p1x = p0x + nx;
    const double* p1y = p0y + nx;
    double* vrow = vy + j * nx;
    const double* a = avy_.data() + j * nx;
    const double* b = bvy_.data() + j * nx;
    for (std::size_t i = 0; i < nx; ++i) {
      const double dp = (p1x[i] + p1y[i]) - (p0x[i] + p0y[i]);
      vrow[i] = a[i] * vrow[i] - b[i] * dp;
    }
  }
#pragma omp parallel for schedule(static)
  for (std::size_t j = 1; j < ny - 1; ++j) {
    const std::size_t row = j * nx;
    const double* vxr = vx + j * nxf;
    const double* vyu = vy + j * nx;
    const double* vyd = vy + (j - 1) * nx;
    for (std::size_t i = 1; i < nx - 1; ++i) {
      const std::size_t n = row + i;
      px[n] = apx_[n] * px[n] - bpx_[n] * (vxr[i] - vxr[i - 1]);
      py[n] = apy_[n] * py[n] - bpy_[n] * (vyu[i] - vyd[i]);
    }
  }
}

void WaveSolver::record(const State& s, std::size_t k, Sinogram& out) const {
  for (std::size_t d = 0; d < stencils_.size(); ++d) {
    if (!active_[d]) continue;
    const BilinearStencil& st = stencils_[d];
    double v = 0.0;
    for (int q = 0; q < 4; ++q) v += st.weights[q] * (s.px[st.nodes[q]] + s.py[st.nodes[q]]);
    out.at(d, k) = v;
  }
}

void WaveSolver::check_finite(const State& s, std::size_t step_index) const {
  for (std::size_t n = 0; n < s.px.size(); ++n) {
    if (!std::isfinite(s.px[n]) || !std::isfinite(s.py[n])) {
      std::ostringstream msg;
      msg << "wave solver: non-finite field at step " << step_index << " (instability)";
      throw NumericalError(msg.str());
    }
  }
}

Sinogram WaveSolver::forward(const Field& f) const {
  Sinogram out = Sinogram::zeros(detectors_, axis_.n_t, axis_.dt);
  out.T = axis_.T;
  State s;
  initialize(f, s);
  for (std::size_t k = 0; k < axis_.n_t; ++k) {
    step(s);
    record(s, k, out);
    if ((k + 1) % 256 == 0 || k + 1 == axis_.n_t) check_finite(s, k + 1);
  }
  return out;
}

std::vector<WaveState> WaveSolver::forward_snapshots(const Field& f, std::size_t stride) const {
  if (stride == 0) throw std::invalid_argument("snapshots: stride must be positive");
  const Grid2D& g = grid();
  const std::size_t count = 2 + axis_.n_t / stride;
  if (count * 2 * g.size() * sizeof(double) > kMaxSnapshotBytes) {
    throw std::invalid_argument("snapshots: requested snapshot count exceeds the memory guard");
  }
  auto pressure = [&](const State& s) {
    Field y(g);
    for (std::size_t n = 0; n < g.size(); ++n) y[n] = s.px[n] + s.py[n];
    return y;
  };
  std::vector<WaveState> snaps;
  State s;
  initialize(f, s);
  Field prev = pressure(s);
  snaps.push_back(WaveState{prev, prev, 0, axis_.dt});
  for (std::size_t k = 1; k <= axis_.n_t; ++k) {
    step(s);
    if (k % 256 == 0 || k == axis_.n_t) check_finite(s, k);
    const bool keep = k % stride == 0 || k == axis_.n_t;
    const bool keep_next = (k + 1) % stride == 0 || k + 1 == axis_.n_t;
    if (keep) {
      Field cur = pressure(s);
      snaps.push_back(WaveState{prev, cur, k, axis_.dt});
      prev = std::move(cur);
    } else if (keep_next) {
      prev = pressure(s);
    }
  }
  return snaps;
}

Field WaveSolver::adjoint_l2(const Sinogram& h) const {
  if (!axis_.matches(h)) {
    std::ostringstream msg;
    msg << "adjoint: time grid mismatch (sinogram n_t=" << h.n_t << " dt=" << h.dt << ", solver n_t=" << axis_.n_t
        << " dt=" << axis_.dt << ")";
    throw std::invalid_argument(msg.str());
  }
  if (h.n_det != detectors_.size() || h.angles != detectors_.angles) {
    throw std::invalid_argument("adjoint: detector layout mismatch");
  }
  const Grid2D& g = grid();
  const std::size_t nx = g.nx;
  const std::size_t ny = g.ny;
  const std::size_t nxf = nx - 1;
  const std::vector<double> w = detectors_.weights();

  std::vector<double> lpx(g.size(), 0.0), lpy(g.size(), 0.0), q(g.size(), 0.0);
  std::vector<double> lvx(avx_.size(), 0.0), lvy(avy_.size(), 0.0);

  for (std::size_t kk = axis_.n_t; kk-- > 0;) {
    // Transposed sampling.
    for (std::size_t d = 0; d < stencils_.size(); ++d) {
      if (!active_[d]) continue;
      const double gval = w[d] * axis_.dt * h.at(d, kk);
      if (gval == 0.0) continue;
      const BilinearStencil& st = stencils_[d];
      for (int m = 0; m < 4; ++m) {
        lpx[st.nodes[m]] += st.weights[m] * gval;
        lpy[st.nodes[m]] += st.weights[m] * gval;
      }
    }
    // Transposed pressure update: faces collect from their two nodes.
#pragma omp parallel for schedule(static)
    for (std::size_t j = 0; j < ny; ++j) {
      for (std::size_t i = 0; i < nxf; ++i) {
        const std::size_t a = j * nx + i;
        lvx[j * nxf + i] += bpx_[a + 1] * lpx[a + 1] - bpx_[a] * lpx[a];
      }
    }
#pragma omp parallel for schedule(static)
    for (std::size_t j = 0; j < ny - 1; ++j) {
      for (std::size_t i = 0; i < nx; ++i) {
        const std::size_t a = j * nx + i;
        lvy[a] += bpy_[a + nx] * lpy[a + nx] - bpy_[a] * lpy[a];
      }
    }
    for (std::size_t n = 0; n < g.size(); ++n) {
      lpx[n] *= apx_[n];
      lpy[n] *= apy_[n];
    }
    // Transposed velocity update: nodes gather from adjacent faces.
#pragma omp parallel for schedule(static)
    for (std::size_t j = 0; j < ny; ++j) {
      for (std::size_t i = 0; i < nx; ++i) {
        double acc = 0.0;
        if (i + 1 < nx) acc += bvx_[j * nxf + i] * lvx[j * nxf + i];
        if (i > 0) acc -= bvx_[j * nxf + i - 1] * lvx[j * nxf + i - 1];
        if (j + 1 < ny) acc += bvy_[j * nx + i] * lvy[j * nx + i];
        if (j > 0) acc -= bvy_[(j - 1) * nx + i] * lvy[(j - 1) * nx + i];
        q[j * nx + i] = acc;
      }
    }
    for (std::size_t f = 0; f < lvx.size(); ++f) lvx[f] *= avx_[f];
    for (std::size_t f = 0; f < lvy.size(); ++f) lvy[f] *= avy_[f];
    for (std::size_t n = 0; n < g.size(); ++n) {
      lpx[n] += q[n];
      lpy[n] += q[n];
    }
  }

  // Transposed initialization.
  Field out(g);
  for (std::size_t j = 1; j + 1 < ny; ++j)
    for (std::size_t i = 1; i + 1 < nx; ++i) {
      const std::size_t n = g.index(i, j);
      out[n] = 0.5 * (lpx[n] + lpy[n]);
    }
  std::vector<double> gv(g.size(), 0.0);
  for (std::size_t j = 0; j < ny; ++j)
    for (std::size_t i = 0; i < nxf; ++i) {
      const double c = cinit_x_[j * nxf + i] * lvx[j * nxf + i];
      gv[j * nx + i + 1] += c;
      gv[j * nx + i] -= c;
    }
  for (std::size_t j = 0; j + 1 < ny; ++j)
    for (std::size_t i = 0; i < nx; ++i) {
      const double c = cinit_y_[j * nx + i] * lvy[j * nx + i];
      gv[(j + 1) * nx + i] += c;
      gv[j * nx + i] -= c;
    }
  // The initial split only feeds interior nodes.
  for (std::size_t j = 1; j + 1 < ny; ++j)
    for (std::size_t i = 1; i + 1 < nx; ++i) {
      const std::size_t n = g.index(i, j);
      out[n] += gv[n];
    }
  const double inv_area = 1.0 / (g.dx * g.dx);
  out *= inv_area;
  out.restrict_to_omega();
  return out;
}

Sinogram solve_forward(const InitialPressure& f, const MediumField& medium, double T, const DetectorArray& detectors,
                       double dt_divisor) {
  const WaveSolver solver(medium, TimeAxis::for_medium(medium, T, dt_divisor), detectors);
  return solver.forward(f.values);
}

std::vector<WaveState> solve_forward_full(const InitialPressure& f, const MediumField& medium, double T,
                                          std::size_t stride, double dt_divisor) {
  const WaveSolver solver(medium, TimeAxis::for_medium(medium, T, dt_divisor), DetectorArray::uniform(1));
  return solver.forward_snapshots(f.values, stride);
}

double total_energy(const WaveState& state, const MediumField& medium) {
  const Grid2D& g = medium.grid();
  require_same_grid(state.y_curr.grid(), g, "total_energy");
  require_same_grid(state.y_prev.grid(), g, "total_energy");
  const Field& yc = state.y_curr;
  const Field& yp = state.y_prev;
  const auto& irx = medium.inv_rho_x();
  const auto& iry = medium.inv_rho_y();
  double kinetic = 0.0;
  double potential = 0.0;
  for (std::size_t j = 0; j < g.ny; ++j) {
    for (std::size_t i = 0; i < g.nx; ++i) {
      if (!g.in_window(i, j)) continue;
      if (state.dt > 0.0) {
        const double v = (yc(i, j) - yp(i, j)) / state.dt;
        kinetic += medium.kappa()(i, j) * v * v;
      }
      if (i + 1 < g.nx && g.in_window(i + 1, j)) {
        potential += irx[j * (g.nx - 1) + i] * (yc(i + 1, j) - yc(i, j)) * (yp(i + 1, j) - yp(i, j));
      }
      if (j + 1 < g.ny && g.in_window(i, j + 1)) {
        potential += iry[j * g.nx + i] * (yc(i, j + 1) - yc(i, j)) * (yp(i, j + 1) - yp(i, j));
      }
    }
  }
  return 0.5 * (kinetic * g.dx * g.dx + potential);
}

double window_norm_H1kr(const Field& y, const MediumField& medium) {
  const Grid2D& g = medium.grid();
  require_same_grid(y.grid(), g, "window_norm_H1kr");
  const auto& irx = medium.inv_rho_x();
  const auto& iry = medium.inv_rho_y();
  double mass = 0.0;
  double grad = 0.0;
  for (std::size_t j = 0; j < g.ny; ++j) {
    for (std::size_t i = 0; i < g.nx; ++i) {
      if (!g.in_window(i, j)) continue;
      mass += medium.kappa()(i, j) * y(i, j) * y(i, j);
      if (i + 1 < g.nx && g.in_window(i + 1, j)) {
        const double d = y(i + 1, j) - y(i, j);
        grad += irx[j * (g.nx - 1) + i] * d * d;
      }
      if (j + 1 < g.ny && g.in_window(i, j + 1)) {
        const double d = y(i, j + 1) - y(i, j);
        grad += iry[j * g.nx + i] * d * d;
      }
    }
  }
  return std::sqrt(mass * g.dx * g.dx + grad);
}

}  // namespace pat
