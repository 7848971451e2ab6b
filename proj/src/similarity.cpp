#include "screwreg/similarity.hpp"

#include <algorithm>
#include <cmath>

namespace screwreg {

namespace {

constexpr double kFlatEps = 1e-12;

template <class Sample>
inline double diff_x(const Sample& s, int x, int y, int w) {
  if (x == 0) return s(1, y) - s(0, y);
  if (x == w - 1) return s(w - 1, y) - s(w - 2, y);
  return (s(x + 1, y) - s(x - 1, y)) / 2.0;
}

template <class Sample>
inline double diff_y(const Sample& s, int x, int y, int h) {
  if (y == 0) return s(x, 1) - s(x, 0);
  if (y == h - 1) return s(x, h - 1) - s(x, h - 2);
  return (s(x, y + 1) - s(x, y - 1)) / 2.0;
}

void require_size(int w, int h) {
  if (w < 3 || h < 3) fail(ErrorCode::ImageTooSmall, "gradient needs at least 3x3 pixels");
}

}  // namespace

GradientField gradients(const GrayImage& img) {
  const int w = img.width();
  const int h = img.height();
  require_size(w, h);
  GradientField f{w, h, std::vector<double>(img.size()), std::vector<double>(img.size())};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const auto i = static_cast<std::size_t>(y) * w + x;
      f.gx[i] = diff_x(img, x, y, w);
      f.gy[i] = diff_y(img, x, y, h);
    }
  }
  return f;
}

double gcl(const GrayImage& proj, const GrayImage& real) {
  if (!proj.same_shape(real)) fail(ErrorCode::DimensionMismatch, "gcl inputs differ in size");
  const auto a = gradients(proj);
  const auto b = gradients(real);
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.gx.size(); ++i) {
    dot += a.gx[i] * b.gx[i] + a.gy[i] * b.gy[i];
    na += a.gx[i] * a.gx[i] + a.gy[i] * a.gy[i];
    nb += b.gx[i] * b.gx[i] + b.gy[i] * b.gy[i];
  }
  if (na < kFlatEps || nb < kFlatEps) return 0.0;
  return -dot / (std::sqrt(na) * std::sqrt(nb));
}

double gcl(const BinaryMask& proj, const GrayImage& real) { return gcl(to_gray(proj), real); }

double dice(const BinaryMask& a, const BinaryMask& b) {
  if (!a.same_shape(b)) fail(ErrorCode::DimensionMismatch, "dice inputs differ in size");
  std::size_t na = 0, nb = 0, both = 0;
  auto pa = a.pixels();
  auto pb = b.pixels();
  for (std::size_t i = 0; i < pa.size(); ++i) {
    const bool x = pa[i] != 0;
    const bool y = pb[i] != 0;
    na += x;
    nb += y;
    both += x && y;
  }
  if (na + nb == 0) fail(ErrorCode::BothEmpty, "dice of two empty masks");
  return 2.0 * static_cast<double>(both) / static_cast<double>(na + nb);
}

double mean_loss(double ap, double lat) { return (ap + lat) / 2.0; }

GradientCorrelation::GradientCorrelation(const GrayImage& real) : field_(gradients(real)) {
  double n = 0.0;
  for (std::size_t i = 0; i < field_.gx.size(); ++i) n += field_.gx[i] * field_.gx[i] + field_.gy[i] * field_.gy[i];
  real_norm_ = n < kFlatEps ? 0.0 : std::sqrt(n);
}

double GradientCorrelation::operator()(const BinaryMask& proj, const PixelBox& box) const {
  const int w = field_.width;
  const int h = field_.height;
  if (proj.width() != w || proj.height() != h) fail(ErrorCode::DimensionMismatch, "projection size mismatch");
  if (box.empty() || real_norm_ == 0.0) return 0.0;

  const int x0 = std::max(box.x0 - 1, 0), x1 = std::min(box.x1 + 1, w - 1);
  const int y0 = std::max(box.y0 - 1, 0), y1 = std::min(box.y1 + 1, h - 1);
  const std::uint8_t* m = proj.pixels().data();
  const auto at = [m, w](int x, int y) { return static_cast<int>(m[static_cast<std::size_t>(y) * w + x]); };
  // Differences stay in integers (doubled for the central case) until a
  // nonzero gradient is found.
  double dot = 0.0, np = 0.0;
  for (int y = y0; y <= y1; ++y) {
    const int ya = y == 0 ? 0 : y - 1;
    const int yb = y == h - 1 ? h - 1 : y + 1;
    const double y_scale = (y == 0 || y == h - 1) ? 1.0 : 0.5;
    const std::size_t row = static_cast<std::size_t>(y) * w;
    for (int x = x0; x <= x1; ++x) {
      const int xa = x == 0 ? 0 : x - 1;
      const int xb = x == w - 1 ? w - 1 : x + 1;
      const int dx = at(xb, y) - at(xa, y);
      const int dy = at(x, yb) - at(x, ya);
      if ((dx | dy) == 0) continue;
      const double gx = dx * ((x == 0 || x == w - 1) ? 1.0 : 0.5);
      const double gy = dy * y_scale;
      const auto i = row + static_cast<std::size_t>(x);
      dot += gx * field_.gx[i] + gy * field_.gy[i];
      np += gx * gx + gy * gy;
    }
  }
  if (np < kFlatEps) return 0.0;
  return -dot / (std::sqrt(np) * real_norm_);
}

double GradientCorrelation::operator()(const BinaryMask& proj) const {
  PixelBox box;
  for (int y = 0; y < proj.height(); ++y)
    for (int x = 0; x < proj.width(); ++x)
      if (proj(x, y)) box.include(x, y);
  return (*this)(proj, box);
}

}  // namespace screwreg
