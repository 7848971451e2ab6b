#pragma once

#include <Eigen/Core>

#include <string_view>

namespace screwreg {

using Vec3 = Eigen::Vector3d;
using Point3 = Eigen::Vector3d;  // millimeters
using Point2 = Eigen::Vector2d;  // pixels (u, v)
using Mat34 = Eigen::Matrix<double, 3, 4, Eigen::RowMajor>;

enum class View { AP = 0, LAT = 1 };

std::string_view to_string(View view);
View view_from_string(std::string_view name);

/// Calibrated 3x4 camera. Only finiteness is enforced on construction; rank
/// deficiency of the left 3x3 block is reported by is_non_degenerate() since
/// affine test cameras are legitimately rank deficient there.
class ProjectionMatrix {
 public:
  ProjectionMatrix() = default;
  explicit ProjectionMatrix(const Mat34& rows, View label = View::AP);

  const Mat34& rows() const { return rows_; }
  double operator()(int r, int c) const { return rows_(r, c); }
  View label() const { return label_; }

  bool is_non_degenerate() const;

 private:
  Mat34 rows_ = Mat34::Zero();
  View label_ = View::AP;
};

/// Homogeneous multiply then divide. Throws PointAtInfinity when |w| <= 1e-12.
Point2 project_point(const ProjectionMatrix& P, const Point3& X);

struct Triangulation {
  Point3 point;
  double residual = 0.0;  // ||A x - b|| of the 4x3 system
};

/// Least-squares intersection of two viewing rays. Two equations per view:
///   X (p11 - u p31) + Y (p12 - u p32) + Z (p13 - u p33) = u p34 - p14
///   X (p21 - v p31) + Y (p22 - v p32) + Z (p23 - v p33) = v p34 - p24
/// solved by SVD. Throws DegenerateGeometry when sigma_min < 1e-9 sigma_max.
Triangulation triangulate(const ProjectionMatrix& P_ap, const ProjectionMatrix& P_lat,
                          const Point2& uv_ap, const Point2& uv_lat);

/// V = C - T. Throws CoincidentLandmarks when ||C - T|| <= 1e-6 mm.
Vec3 center_to_tip_vector(const Point3& tip, const Point3& center);

}  // namespace screwreg
