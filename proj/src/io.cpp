#include "pat/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pat/keyvalue.hpp"
#include "pat/pgm.hpp"

namespace pat {

static_assert(std::endian::native == std::endian::little, "file formats assume a little-endian host");

namespace {

constexpr char kFieldMagic[] = "PATFLD1\n";
constexpr char kSinoMagic[] = "PATSINO1\n";

class Writer {
 public:
  explicit Writer(const std::string& path) : path_(path), out_(path, std::ios::binary) {
    if (!out_) throw std::runtime_error("cannot open '" + path + "' for writing");
  }
  void bytes(const void* p, std::size_t n) { out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n)); }
  void u32(std::uint32_t v) { bytes(&v, 4); }
  void f64(double v) { bytes(&v, 8); }
  void f64s(const std::vector<double>& v) { bytes(v.data(), v.size() * 8); }
  void finish() {
    out_.flush();
    if (!out_) throw std::runtime_error("write to '" + path_ + "' failed");
  }

 private:
  std::string path_;
  std::ofstream out_;
};

class Reader {
 public:
  explicit Reader(const std::string& path) : path_(path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    data_.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }
  void need(std::size_t n, const char* what) const {
    if (pos_ + n > data_.size()) {
      std::ostringstream msg;
      msg << path_ << ": truncated " << what << " at byte offset " << pos_ << ": need " << n << " bytes, "
          << (pos_ + n - data_.size()) << " bytes missing";
      throw FormatError(msg.str());
    }
  }
  void magic(const char* m) {
    const std::size_t n = std::strlen(m);
    if (data_.size() < n || std::memcmp(data_.data(), m, n) != 0) {
      std::string shown = m;
      shown.pop_back();
      throw FormatError(path_ + ": bad magic at byte offset 0 (expected '" + shown + "')");
    }
    pos_ = n;
  }
  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v;
    std::memcpy(&v, data_.data() + pos_, 4);
    pos_ += 4;
    return v;
  }
  double f64(const char* what) {
    need(8, what);
    double v;
    std::memcpy(&v, data_.data() + pos_, 8);
    pos_ += 8;
    return v;
  }
  std::vector<double> f64s(std::size_t count, const char* what) {
    need(count * 8, what);
    std::vector<double> v(count);
    std::memcpy(v.data(), data_.data() + pos_, count * 8);
    for (std::size_t k = 0; k < count; ++k) {
      if (!std::isfinite(v[k])) {
        std::ostringstream msg;
        msg << path_ << ": non-finite " << what << " value at byte offset " << pos_ + 8 * k;
        throw FormatError(msg.str());
      }
    }
    pos_ += count * 8;
    return v;
  }
  std::size_t pos() const { return pos_; }
  void expect_end() const {
    if (pos_ != data_.size()) {
      std::ostringstream msg;
      msg << path_ << ": " << data_.size() - pos_ << " trailing bytes after byte offset " << pos_;
      throw FormatError(msg.str());
    }
  }
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::vector<char> data_;
  std::size_t pos_ = 0;
};

std::uint32_t checked_u32(std::size_t v, const char* what) {
  if (v > 0xffffffffu) throw std::invalid_argument(std::string(what) + " does not fit in 32 bits");
  return static_cast<std::uint32_t>(v);
}

}  // namespace

void write_field(const std::string& path, const Field& f) {
  if (!f.all_finite()) throw std::invalid_argument("write_field: field has non-finite values");
  const Grid2D& g = f.grid();
  Writer w(path);
  w.bytes(kFieldMagic, 8);
  w.u32(checked_u32(g.nx, "nx"));
  w.u32(checked_u32(g.ny, "ny"));
  w.f64(g.dx);
  w.f64(g.origin_x);
  w.f64(g.origin_y);
  w.f64s(f.data());
  w.finish();
}

Field read_field(const std::string& path, std::size_t pml_width) {
  Reader r(path);
  r.magic(kFieldMagic);
  Grid2D g;
  g.nx = r.u32("header");
  g.ny = r.u32("header");
  g.dx = r.f64("header");
  g.origin_x = r.f64("header");
  g.origin_y = r.f64("header");
  g.pml_width = pml_width;
  if (!(g.dx > 0.0) || !std::isfinite(g.origin_x) || !std::isfinite(g.origin_y) || g.nx == 0 || g.ny == 0)
    throw FormatError(path + ": invalid grid header");
  std::vector<double> v = r.f64s(g.nx * g.ny, "payload");
  r.expect_end();
  return Field(g, std::move(v));
}

void write_sinogram(const std::string& path, const Sinogram& s) {
  s.validate();
  Writer w(path);
  w.bytes(kSinoMagic, 9);
  w.u32(checked_u32(s.n_det, "n_det"));
  w.u32(checked_u32(s.n_t, "n_t"));
  w.f64(s.dt);
  w.f64(s.T);
  w.f64(s.arc.start);
  w.f64(s.arc.end);
  w.f64s(s.angles);
  w.f64s(s.samples);
  w.finish();
}

Sinogram read_sinogram(const std::string& path) {
  Reader r(path);
  r.magic(kSinoMagic);
  Sinogram s;
  s.n_det = r.u32("header");
  s.n_t = r.u32("header");
  s.dt = r.f64("header");
  s.T = r.f64("header");
  s.arc.start = r.f64("header");
  s.arc.end = r.f64("header");
  s.angles = r.f64s(s.n_det, "angle");
  s.samples = r.f64s(s.n_det * s.n_t, "payload");
  r.expect_end();
  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    throw FormatError(path + ": " + e.what());
  }
  return s;
}

void emit_image(const Field& f, const std::string& pgm_path, Normalization norm) {
  const Grid2D& g = f.grid();
  GrayImage img;
  img.width = g.nx;
  img.height = g.ny;
  img.maxval = 255;
  img.pixels.resize(g.size());
  const double lo = f.min();
  const double hi = f.max();
  const double s = f.max_abs();
  for (std::size_t j = 0; j < g.ny; ++j) {
    for (std::size_t i = 0; i < g.nx; ++i) {
      const double v = f(i, j);
      double level;
      if (norm == Normalization::minmax) {
        level = hi > lo ? 255.0 * (v - lo) / (hi - lo) : 0.0;
      } else {
        level = s > 0.0 ? 127.5 + 127.5 * v / s : 127.5;
      }
      const long q = std::lround(level);
      img.pixels[(g.ny - 1 - j) * g.nx + i] = static_cast<std::uint16_t>(std::clamp(q, 0L, 255L));
    }
  }
  write_pgm(pgm_path, img);

  const std::string csv = std::filesystem::path(pgm_path).replace_extension(".csv").string();
  std::FILE* out = std::fopen(csv.c_str(), "w");
  if (!out) throw std::runtime_error("cannot open '" + csv + "' for writing");
  for (std::size_t j = 0; j < g.ny; ++j) {
    for (std::size_t i = 0; i < g.nx; ++i) std::fprintf(out, i ? ",%.17g" : "%.17g", f(i, j));
    std::fputc('\n', out);
  }
  if (std::fclose(out) != 0) throw std::runtime_error("write to '" + csv + "' failed");
}

Field read_field_csv(const std::string& csv_path, const Grid2D& grid) {
  std::ifstream in(csv_path);
  if (!in) throw std::runtime_error("cannot open '" + csv_path + "'");
  Field f(grid);
  std::string line;
  std::size_t j = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (j >= grid.ny) throw FormatError(csv_path + ": too many rows");
    const std::vector<std::string> cells = split_list(line);
    if (cells.size() != grid.nx) throw FormatError(csv_path + ": row " + std::to_string(j) + " has wrong length");
    for (std::size_t i = 0; i < grid.nx; ++i) f(i, j) = parse_double(cells[i], csv_path);
    ++j;
  }
  if (j != grid.ny) throw FormatError(csv_path + ": too few rows");
  return f;
}

}  // namespace pat
