#include "screwreg/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

namespace screwreg {

GrayImage to_gray(const BinaryMask& mask) {
  GrayImage out(mask.width(), mask.height());
  auto src = mask.pixels();
  auto dst = out.pixels();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] ? 1.0 : 0.0;
  return out;
}

std::size_t count_ones(const BinaryMask& mask) {
  return static_cast<std::size_t>(std::count_if(mask.pixels().begin(), mask.pixels().end(), [](auto v) { return v != 0; }));
}

namespace {

void write_header(std::ostream& out, int w, int h) { out << "P5\n" << w << ' ' << h << "\n255\n"; }

std::uint8_t quantize(double v) {
  if (!(v > 0.0)) return 0;
  if (v >= 1.0) return 255;
  return static_cast<std::uint8_t>(std::lround(v * 255.0));
}

// Reads one header integer, skipping whitespace and '#' comments.
int read_header_int(std::istream& in) {
  int c = in.peek();
  while (c != EOF) {
    if (std::isspace(c)) {
      in.get();
    } else if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    } else {
      break;
    }
    c = in.peek();
  }
  int value = 0;
  if (!(in >> value) || value < 0) fail(ErrorCode::ParseError, "malformed PGM header");
  return value;
}

template <class Path>
std::ofstream open_out(const Path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::IoError, "cannot write " + path.string());
  return out;
}

}  // namespace

void write_pgm(std::ostream& out, const GrayImage& img) {
  write_header(out, img.width(), img.height());
  std::vector<char> row(img.size());
  std::transform(img.pixels().begin(), img.pixels().end(), row.begin(),
                 [](double v) { return static_cast<char>(quantize(v)); });
  out.write(row.data(), static_cast<std::streamsize>(row.size()));
}

void write_pgm(std::ostream& out, const BinaryMask& mask) {
  write_header(out, mask.width(), mask.height());
  std::vector<char> row(mask.size());
  std::transform(mask.pixels().begin(), mask.pixels().end(), row.begin(),
                 [](std::uint8_t v) { return static_cast<char>(v ? 255 : 0); });
  out.write(row.data(), static_cast<std::streamsize>(row.size()));
}

void write_pgm(const std::filesystem::path& path, const GrayImage& img) {
  auto out = open_out(path);
  write_pgm(out, img);
}

void write_pgm(const std::filesystem::path& path, const BinaryMask& mask) {
  auto out = open_out(path);
  write_pgm(out, mask);
}

Image<std::uint8_t> read_pgm_bytes(std::istream& in) {
  char magic[2] = {};
  if (!in.read(magic, 2) || magic[0] != 'P' || magic[1] != '5') fail(ErrorCode::ParseError, "not a binary PGM (P5)");
  const int w = read_header_int(in);
  const int h = read_header_int(in);
  const int maxval = read_header_int(in);
  if (maxval != 255) fail(ErrorCode::ParseError, "only 8-bit PGM (maxval 255) is supported");
  if (!std::isspace(in.get())) fail(ErrorCode::ParseError, "missing whitespace after PGM header");
  std::vector<std::uint8_t> data(static_cast<std::size_t>(w) * static_cast<std::size_t>(h));
  if (!in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(data.size()))) {
    fail(ErrorCode::ParseError, "truncated PGM pixel data");
  }
  return Image<std::uint8_t>(w, h, std::move(data));
}

GrayImage read_pgm_gray(std::istream& in) {
  const auto raw = read_pgm_bytes(in);
  GrayImage out(raw.width(), raw.height());
  std::transform(raw.pixels().begin(), raw.pixels().end(), out.pixels().begin(),
                 [](std::uint8_t v) { return v / 255.0; });
  return out;
}

BinaryMask read_pgm_mask(std::istream& in) {
  auto raw = read_pgm_bytes(in);
  for (auto& v : raw.pixels()) v = v ? 1 : 0;
  return raw;
}

GrayImage read_pgm_gray(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::ParseError, "cannot open " + path.string());
  return read_pgm_gray(in);
}

BinaryMask read_pgm_mask(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::ParseError, "cannot open " + path.string());
  return read_pgm_mask(in);
}

}  // namespace screwreg
