#pragma once

#include "screwreg/geometry.hpp"
#include "screwreg/image.hpp"
#include "screwreg/mesh.hpp"

#include <span>

namespace screwreg {

/// Inclusive pixel rectangle touched by a rasterization; empty when x0 > x1.
struct PixelBox {
  int x0 = 1, y0 = 1, x1 = 0, y1 = 0;

  bool empty() const { return x0 > x1 || y0 > y1; }
  void include(int x, int y);
  void merge(const PixelBox& o);
};

/// Silhouette of `mesh` under `P`: pixel (x, y) is set when its center
/// (x + 0.5, y + 0.5) lies inside or on the boundary of any projected face.
/// Zero-area projections contribute nothing; off-image parts are clipped.
/// Throws VertexAtInfinity (|w| <= 1e-9) or NegativeDepth (w < 0).
BinaryMask rasterize(const TriMesh& mesh, const ProjectionMatrix& P, int width, int height);

/// ORs the silhouette of the vertices transformed by `camera` (a 3x4 matrix,
/// typically P * pose) into `mask`. Returns the box of pixels written.
PixelBox rasterize_into(BinaryMask& mask, std::span<const Point3> vertices, std::span<const Face> faces,
                        const Mat34& camera);

/// Fills one projected triangle into `mask`; returns pixels written.
PixelBox fill_triangle(BinaryMask& mask, const Point2& a, const Point2& b, const Point2& c);

/// I_final = I_proj * M_bg. Throws DimensionMismatch.
BinaryMask apply_background(const BinaryMask& mask, const BinaryMask& background);

}  // namespace screwreg
