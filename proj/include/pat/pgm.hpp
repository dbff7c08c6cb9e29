#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace pat {

/// 8- or 16-bit grayscale raster, row 0 at the top.
struct GrayImage {
  std::size_t width = 0;
  std::size_t height = 0;
  unsigned maxval = 255;
  std::vector<std::uint16_t> pixels;

  double at(std::size_t col, std::size_t row) const { return pixels[row * width + col]; }
  /// Bilinear sample in pixel coordinates, clamped to the image.
  double sample(double col, double row) const;
};

/// Binary PGM (P5). Throws std::runtime_error on malformed input.
GrayImage read_pgm(const std::string& path);
void write_pgm(const std::string& path, const GrayImage& image);

}  // namespace pat
