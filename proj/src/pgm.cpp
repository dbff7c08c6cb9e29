#include "pat/pgm.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace pat {

namespace {

std::string next_token(std::istream& in) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(static_cast<char>(c));
  }
  return tok;
}

}  // namespace

double GrayImage::sample(double col, double row) const {
  col = std::clamp(col, 0.0, static_cast<double>(width - 1));
  row = std::clamp(row, 0.0, static_cast<double>(height - 1));
  const auto c0 = std::min(static_cast<std::size_t>(col), width > 1 ? width - 2 : 0);
  const auto r0 = std::min(static_cast<std::size_t>(row), height > 1 ? height - 2 : 0);
  const std::size_t c1 = std::min(c0 + 1, width - 1);
  const std::size_t r1 = std::min(r0 + 1, height - 1);
  const double tc = col - static_cast<double>(c0);
  const double tr = row - static_cast<double>(r0);
  return (1 - tc) * (1 - tr) * at(c0, r0) + tc * (1 - tr) * at(c1, r0) + (1 - tc) * tr * at(c0, r1) +
         tc * tr * at(c1, r1);
}

GrayImage read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("pgm: cannot open '" + path + "'");
  if (next_token(in) != "P5") throw std::runtime_error("pgm: '" + path + "' is not a binary P5 file");
  GrayImage img;
  try {
    img.width = std::stoul(next_token(in));
    img.height = std::stoul(next_token(in));
    img.maxval = static_cast<unsigned>(std::stoul(next_token(in)));
  } catch (const std::exception&) {
    throw std::runtime_error("pgm: malformed header in '" + path + "'");
  }
  if (img.width == 0 || img.height == 0 || img.maxval == 0 || img.maxval > 65535) {
    throw std::runtime_error("pgm: invalid dimensions or maxval in '" + path + "'");
  }
  const std::size_t bytes_per = img.maxval > 255 ? 2 : 1;
  std::vector<unsigned char> raw(img.width * img.height * bytes_per);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (static_cast<std::size_t>(in.gcount()) != raw.size()) {
    throw std::runtime_error("pgm: truncated payload in '" + path + "'");
  }
  img.pixels.resize(img.width * img.height);
  for (std::size_t n = 0; n < img.pixels.size(); ++n) {
    img.pixels[n] = bytes_per == 1 ? raw[n] : static_cast<std::uint16_t>((raw[2 * n] << 8) | raw[2 * n + 1]);
  }
  return img;
}

void write_pgm(const std::string& path, const GrayImage& image) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("pgm: cannot write '" + path + "'");
  out << "P5\n" << image.width << " " << image.height << "\n" << image.maxval << "\n";
  const bool wide = image.maxval > 255;
  for (std::uint16_t p : image.pixels) {
    if (wide) out.put(static_cast<char>(p >> 8));
    out.put(static_cast<char>(p & 0xff));
  }
  if (!out) throw std::runtime_error("pgm: write failed for '" + path + "'");
}

}  // namespace pat
