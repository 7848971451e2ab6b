#pragma once

#include "screwreg/error.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace screwreg {

/// Row-major single-channel raster.
template <class T>
class Image {
 public:
  using value_type = T;

  Image() = default;
  Image(int width, int height, T fill = T{}) : width_(width), height_(height) {
    if (width < 0 || height < 0) fail(ErrorCode::InvalidArgument, "negative image size");
    data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
  }
  Image(int width, int height, std::vector<T> data) : width_(width), height_(height), data_(std::move(data)) {
    if (width < 0 || height < 0) fail(ErrorCode::InvalidArgument, "negative image size");
    if (data_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
      fail(ErrorCode::DimensionMismatch, "pixel buffer size does not match dimensions");
    }
  }

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return data_.size(); }

  T& operator()(int x, int y) { return data_[static_cast<std::size_t>(y) * width_ + x]; }
  const T& operator()(int x, int y) const { return data_[static_cast<std::size_t>(y) * width_ + x]; }

  std::span<T> pixels() { return data_; }
  std::span<const T> pixels() const { return data_; }
  const std::vector<T>& data() const { return data_; }

  void fill(T value) { std::fill(data_.begin(), data_.end(), value); }

  bool same_shape(const Image<std::uint8_t>& o) const { return width_ == o.width() && height_ == o.height(); }
  bool same_shape(const Image<double>& o) const { return width_ == o.width() && height_ == o.height(); }

  friend bool operator==(const Image& a, const Image& b) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

/// Pixel values in {0, 1}.
using BinaryMask = Image<std::uint8_t>;
/// Intensities in [0, 1].
using GrayImage = Image<double>;

GrayImage to_gray(const BinaryMask& mask);
std::size_t count_ones(const BinaryMask& mask);

// 8-bit binary PGM ("P5"). Masks map 1 <-> 255; gray images scale [0,1] <-> [0,255].
void write_pgm(std::ostream& out, const GrayImage& img);
void write_pgm(std::ostream& out, const BinaryMask& mask);
void write_pgm(const std::filesystem::path& path, const GrayImage& img);
void write_pgm(const std::filesystem::path& path, const BinaryMask& mask);

GrayImage read_pgm_gray(std::istream& in);
GrayImage read_pgm_gray(const std::filesystem::path& path);
/// Any nonzero sample is foreground.
BinaryMask read_pgm_mask(std::istream& in);
BinaryMask read_pgm_mask(const std::filesystem::path& path);

/// Raw 8-bit samples, shared by both readers.
Image<std::uint8_t> read_pgm_bytes(std::istream& in);

}  // namespace screwreg
