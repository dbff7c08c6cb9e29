#pragma once

#include <string>

#include "pat/grid.hpp"
#include "pat/wave.hpp"

namespace pat {

/// Raised for malformed or truncated files; the message names the byte
/// offset where reading failed.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// "PATFLD1\n", u32 nx, ny, f64 dx, origin_x, origin_y, nx*ny f64 values
/// (y-outer), all little-endian. The absorbing-layer width is not stored;
/// it is supplied on reading.
void write_field(const std::string& path, const Field& f);
Field read_field(const std::string& path, std::size_t pml_width = 0);

/// "PATSINO1\n", u32 n_det, n_t, f64 dt, T, arc_start, arc_end, n_det f64
/// angles, n_det*n_t f64 samples (detector-major), all little-endian.
void write_sinogram(const std::string& path, const Sinogram& s);
Sinogram read_sinogram(const std::string& path);

enum class Normalization { minmax, symmetric };

/// 8-bit P5 image (top row = largest y) plus `<stem>.csv` with the raw
/// values, one CSV row per grid row starting at the smallest y.
void emit_image(const Field& f, const std::string& pgm_path, Normalization norm = Normalization::minmax);
/// Reads a CSV written by emit_image back onto `grid`.
Field read_field_csv(const std::string& csv_path, const Grid2D& grid);

}  // namespace pat
