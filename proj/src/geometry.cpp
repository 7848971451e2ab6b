#include "screwreg/geometry.hpp"

#include "screwreg/error.hpp"

#include <Eigen/SVD>

#include <cmath>

namespace screwreg {

namespace {
constexpr double kInfinityEps = 1e-12;
constexpr double kRankTolerance = 1e-9;
constexpr double kCoincidentMm = 1e-6;
}  // namespace

std::string_view to_string(View view) { return view == View::AP ? "AP" : "LAT"; }

View view_from_string(std::string_view name) {
  if (name == "AP" || name == "ap") return View::AP;
  if (name == "LAT" || name == "lat") return View::LAT;
  fail(ErrorCode::InvalidArgument, "unknown view '" + std::string(name) + "'");
}

ProjectionMatrix::ProjectionMatrix(const Mat34& rows, View label) : rows_(rows), label_(label) {
  if (!rows_.allFinite()) fail(ErrorCode::InvalidConfig, "projection matrix has non-finite entries");
}

bool ProjectionMatrix::is_non_degenerate() const {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(rows_.leftCols<3>());
  const auto& s = svd.singularValues();
  return s(0) > 0.0 && s(2) > kRankTolerance * s(0);
}

Point2 project_point(const ProjectionMatrix& P, const Point3& X) {
  const double a = P(0, 0) * X.x() + P(0, 1) * X.y() + P(0, 2) * X.z() + P(0, 3);
  const double b = P(1, 0) * X.x() + P(1, 1) * X.y() + P(1, 2) * X.z() + P(1, 3);
  const double w = P(2, 0) * X.x() + P(2, 1) * X.y() + P(2, 2) * X.z() + P(2, 3);
  if (!(std::abs(w) > kInfinityEps)) fail(ErrorCode::PointAtInfinity, "point lies on the principal plane");
  return {a / w, b / w};
}

Triangulation triangulate(const ProjectionMatrix& P_ap, const ProjectionMatrix& P_lat,
                          const Point2& uv_ap, const Point2& uv_lat) {
  Eigen::Matrix<double, 4, 3> A;
  Eigen::Vector4d b;
  auto fill = [&](int row, const ProjectionMatrix& P, int image_row, double coord) {
    for (int j = 0; j < 3; ++j) A(row, j) = P(image_row, j) - coord * P(2, j);
    b(row) = coord * P(2, 3) - P(image_row, 3);
  };
  fill(0, P_ap, 0, uv_ap.x());
  fill(1, P_ap, 1, uv_ap.y());
  fill(2, P_lat, 0, uv_lat.x());
  fill(3, P_lat, 1, uv_lat.y());
  if (!A.allFinite() || !b.allFinite()) fail(ErrorCode::DegenerateGeometry, "non-finite triangulation system");

  Eigen::JacobiSVD<Eigen::Matrix<double, 4, 3>> svd(A, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  if (!(s(0) > 0.0) || s(2) < kRankTolerance * s(0)) {
    fail(ErrorCode::DegenerateGeometry, "triangulation system has rank < 3");
  }
  Triangulation out;
  out.point = svd.solve(b);
  out.residual = (A * out.point - b).norm();
  return out;
}

Vec3 center_to_tip_vector(const Point3& tip, const Point3& center) {
  Vec3 v = center - tip;
  if (!(v.norm() > kCoincidentMm)) fail(ErrorCode::CoincidentLandmarks, "tip and center coincide");
  return v;
}

}  // namespace screwreg
