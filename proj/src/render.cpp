#include "screwreg/render.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

namespace screwreg {

namespace {

constexpr double kDepthEps = 1e-9;

inline double orient(const Point2& a, const Point2& b, double px, double py) {
  return (b.x() - a.x()) * (py - a.y()) - (b.y() - a.y()) * (px - a.x());
}

inline Point2 project_checked(const Mat34& P, const Point3& X) {
  const double a = P(0, 0) * X.x() + P(0, 1) * X.y() + P(0, 2) * X.z() + P(0, 3);
  const double b = P(1, 0) * X.x() + P(1, 1) * X.y() + P(1, 2) * X.z() + P(1, 3);
  const double w = P(2, 0) * X.x() + P(2, 1) * X.y() + P(2, 2) * X.z() + P(2, 3);
  if (!(std::abs(w) > kDepthEps)) fail(ErrorCode::VertexAtInfinity, "mesh vertex projects to infinity");
  if (w < 0.0) fail(ErrorCode::NegativeDepth, "mesh vertex lies behind the camera");
  return {a / w, b / w};
}

// floor/ceil for values already clamped to int range; avoids libm calls.
inline int floor_int(double v) {
  const int i = static_cast<int>(v);
  return i > v ? i - 1 : i;
}
inline int ceil_int(double v) {
  const int i = static_cast<int>(v);
  return i < v ? i + 1 : i;
}
inline double clamp_range(double v, int lo, int hi) { return std::clamp(v, lo - 2.0, hi + 2.0); }

// Pixel index range whose centers k + 0.5 fall in [lo, hi], clamped to [0, n).
inline bool pixel_range(double lo, double hi, int n, int& first, int& last) {
  const double f = std::ceil(lo - 0.5);
  const double l = std::floor(hi - 0.5);
  if (!(f <= l) || l < 0.0 || f > n - 1) return false;
  first = static_cast<int>(std::max(f, 0.0));
  last = static_cast<int>(std::min(l, static_cast<double>(n - 1)));
  return first <= last;
}

}  // namespace

void PixelBox::include(int x, int y) {
  if (empty()) {
    x0 = x1 = x;
    y0 = y1 = y;
    return;
  }
  x0 = std::min(x0, x);
  x1 = std::max(x1, x);
  y0 = std::min(y0, y);
  y1 = std::max(y1, y);
}

void PixelBox::merge(const PixelBox& o) {
  if (o.empty()) return;
  include(o.x0, o.y0);
  include(o.x1, o.y1);
}

PixelBox fill_triangle(BinaryMask& mask, const Point2& a, const Point2& b, const Point2& c) {
  PixelBox box;
  const double area = orient(a, b, c.x(), c.y());
  if (area == 0.0 || !std::isfinite(area)) return box;

  int x_first, x_last, y_first, y_last;
  if (!pixel_range(std::min({a.x(), b.x(), c.x()}), std::max({a.x(), b.x(), c.x()}), mask.width(), x_first, x_last) ||
      !pixel_range(std::min({a.y(), b.y(), c.y()}), std::max({a.y(), b.y(), c.y()}), mask.height(), y_first,
                   y_last)) {
    return box;
  }

  const bool ccw = area > 0.0;
  const double sign = ccw ? 1.0 : -1.0;
  struct Edge {
    double px, py, dx, inv_k;
    bool flat, upper;
  };
  std::array<Edge, 3> edges;
  const std::array<std::pair<const Point2*, const Point2*>, 3> ends{{{&a, &b}, {&b, &c}, {&c, &a}}};
  for (int e = 0; e < 3; ++e) {
    const Point2& p = *ends[e].first;
    const Point2& q = *ends[e].second;
    const double k = q.y() - p.y();
    edges[e] = {p.x(), p.y(), q.x() - p.x(), k == 0.0 ? 0.0 : 1.0 / k, k == 0.0, sign * k > 0.0};
  }
  auto inside = [&](double px, double py) {
    const double e0 = orient(a, b, px, py);
    const double e1 = orient(b, c, px, py);
    const double e2 = orient(c, a, px, py);
    return ccw ? (e0 >= 0.0 && e1 >= 0.0 && e2 >= 0.0) : (e0 <= 0.0 && e1 <= 0.0 && e2 <= 0.0);
  };

  int min_x = mask.width(), max_x = -1, min_y = mask.height(), max_y = -1;
  for (int y = y_first; y <= y_last; ++y) {
    const double py = y + 0.5;
    // Analytic span of the row. Pixels well inside it are set directly; the
    // exact predicate decides the uncertain ends, so the result equals a
    // full per-pixel scan.
    double lo = x_first + 0.5, hi = x_last + 0.5;
    bool empty_row = false;
    for (const auto& e : edges) {
      const double c0 = e.dx * (py - e.py);
      if (e.flat) {
        if (sign * c0 < 0.0) empty_row = true;
        continue;
      }
      const double root = e.px + c0 * e.inv_k;
      if (e.upper) hi = std::min(hi, root);
      else lo = std::max(lo, root);
    }
    if (empty_row || !(lo <= hi + 2.0)) continue;
    lo = clamp_range(lo, x_first, x_last);
    hi = clamp_range(hi, x_first, x_last);
    const int row_lo = std::max(x_first, floor_int(lo - 0.5) - 1);
    const int row_hi = std::min(x_last, ceil_int(hi - 0.5) + 1);
    // Certain interior: centers at least 1e-3 px inside the analytic span.
    const int sure_lo = std::max(row_lo, ceil_int(lo + 1e-3 - 0.5));
    const int sure_hi = std::min(row_hi, floor_int(hi - 1e-3 - 0.5));

    int row_first = -1;
    int row_last = -1;
    auto test = [&](int x) {
      if (inside(x + 0.5, py)) {
        mask(x, y) = 1;
        if (row_first < 0 || x < row_first) row_first = x;
        if (x > row_last) row_last = x;
      }
    };
    if (sure_lo <= sure_hi) {
      for (int x = row_lo; x < sure_lo; ++x) test(x);
      std::fill(&mask(sure_lo, y), &mask(sure_hi, y) + 1, std::uint8_t{1});
      row_first = row_first < 0 ? sure_lo : std::min(row_first, sure_lo);
      row_last = std::max(row_last, sure_hi);
      for (int x = sure_hi + 1; x <= row_hi; ++x) test(x);
    } else {
      for (int x = row_lo; x <= row_hi; ++x) test(x);
    }
    if (row_first >= 0) {
      min_x = std::min(min_x, row_first);
      max_x = std::max(max_x, row_last);
      min_y = std::min(min_y, y);
      max_y = y;
    }
  }
  if (max_y >= 0) box = PixelBox{min_x, min_y, max_x, max_y};
  return box;
}

PixelBox rasterize_into(BinaryMask& mask, std::span<const Point3> vertices, std::span<const Face> faces,
                        const Mat34& camera) {
  std::vector<Point2> projected;
  projected.reserve(vertices.size());
  for (const auto& v : vertices) projected.push_back(project_checked(camera, v));
  PixelBox box;
  for (const auto& f : faces) box.merge(fill_triangle(mask, projected[f[0]], projected[f[1]], projected[f[2]]));
  return box;
}

BinaryMask rasterize(const TriMesh& mesh, const ProjectionMatrix& P, int width, int height) {
  BinaryMask mask(width, height, 0);
  rasterize_into(mask, mesh.vertices(), mesh.faces(), P.rows());
  return mask;
}

BinaryMask apply_background(const BinaryMask& mask, const BinaryMask& background) {
  if (!mask.same_shape(background)) fail(ErrorCode::DimensionMismatch, "mask and background differ in size");
  BinaryMask out(mask.width(), mask.height());
  auto a = mask.pixels();
  auto b = background.pixels();
  auto o = out.pixels();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = static_cast<std::uint8_t>(a[i] * b[i]);
  return out;
}

}  // namespace screwreg
