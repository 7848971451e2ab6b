#include "doctest.h"
#include "oracles.hpp"

#include "screwreg/error.hpp"
#include "screwreg/geometry.hpp"

#include <random>

using namespace screwreg;

namespace {

Mat34 pinhole() {
  Mat34 P;
  P << 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0;
  return P;
}

template <class F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::IoError;
}

}  // namespace

TEST_CASE("project_point divides by depth") {
  const auto uv = project_point(ProjectionMatrix(pinhole()), Point3(2, 4, 2));
  CHECK(uv.x() == 1.0);
  CHECK(uv.y() == 2.0);
}

TEST_CASE("project_point rejects the principal plane") {
  CHECK(code_of([] { project_point(ProjectionMatrix(pinhole()), Point3(1, 1, 0)); }) == ErrorCode::PointAtInfinity);
}

TEST_CASE("project_point matches a homogeneous multiply oracle") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-50, 50);
  for (int i = 0; i < 500; ++i) {
    const Mat34 P = oracle::random_camera(rng);
    const Point3 X(u(rng), u(rng), u(rng));
    const Point2 got = project_point(ProjectionMatrix(P), X);
    const Point2 want = oracle::project(P, X);
    CHECK(std::abs(got.x() - want.x()) <= 1e-12 * std::max(1.0, std::abs(want.x())));
    CHECK(std::abs(got.y() - want.y()) <= 1e-12 * std::max(1.0, std::abs(want.y())));
  }
}

TEST_CASE("projection is invariant to scaling the matrix") {
  std::mt19937_64 rng(12);
  for (int i = 0; i < 100; ++i) {
    const Mat34 P = oracle::random_camera(rng);
    const Point3 X(3, -4, 5);
    const Point2 a = project_point(ProjectionMatrix(P), X);
    const Point2 b = project_point(ProjectionMatrix(-3.7 * P), X);
    CHECK((a - b).norm() < 1e-9);
  }
}

TEST_CASE("non-finite matrices are rejected") {
  Mat34 P = pinhole();
  P(1, 2) = std::nan("");
  CHECK_THROWS_AS(ProjectionMatrix{P}, Error);
}

TEST_CASE("triangulate with axis-aligned affine views") {
  Mat34 ap, lat;
  ap << 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 1;
  lat << 0, 0, 1, 0, 0, 1, 0, 0, 0, 0, 0, 1;
  const auto t = triangulate(ProjectionMatrix(ap, View::AP), ProjectionMatrix(lat, View::LAT), {2, 3}, {4, 3});
  CHECK((t.point - Point3(2, 3, 4)).norm() < 1e-12);
  CHECK(t.residual < 1e-12);
}

TEST_CASE("triangulate round trip through project_point") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-40, 40);
  for (int i = 0; i < 200; ++i) {
    const ProjectionMatrix Pa(oracle::random_camera(rng), View::AP);
    const ProjectionMatrix Pl(oracle::random_camera(rng), View::LAT);
    const Point3 X(u(rng), u(rng), u(rng));
    const auto t = triangulate(Pa, Pl, project_point(Pa, X), project_point(Pl, X));
    CHECK((t.point - X).norm() < 1e-6);
    CHECK(t.residual < 1e-9);
  }
}

TEST_CASE("perturbed observation matches the normal-equations oracle") {
  std::mt19937_64 rng(22);
  std::uniform_real_distribution<double> u(-40, 40);
  for (int i = 0; i < 200; ++i) {
    const Mat34 A = oracle::random_camera(rng), L = oracle::random_camera(rng);
    const Point3 X(u(rng), u(rng), u(rng));
    const Point2 ua = oracle::project(A, X);
    Point2 ul = oracle::project(L, X);
    ul.y() += 1.0;
    const auto t = triangulate(ProjectionMatrix(A), ProjectionMatrix(L), ua, ul);
    const auto o = oracle::triangulate_normal_equations(A, L, ua, ul);
    CHECK(t.residual > 0.0);
    CHECK((t.point - o.x).norm() < 1e-9);
    CHECK(std::abs(t.residual - o.residual) < 1e-9);
  }
}

TEST_CASE("identical views are degenerate") {
  std::mt19937_64 rng(23);
  const ProjectionMatrix P(oracle::random_camera(rng));
  const Point2 uv = project_point(P, Point3(1, 2, 3));
  CHECK(code_of([&] { triangulate(P, P, uv, uv); }) == ErrorCode::DegenerateGeometry);
}

TEST_CASE("center_to_tip_vector") {
  CHECK(center_to_tip_vector(Point3(0, 0, 0), Point3(0, 0, 30)) == Vec3(0, 0, 30));
  CHECK(code_of([] { center_to_tip_vector(Point3(1, 2, 3), Point3(1, 2, 3)); }) == ErrorCode::CoincidentLandmarks);
  std::mt19937_64 rng(24);
  std::uniform_real_distribution<double> u(-100, 100);
  for (int i = 0; i < 100; ++i) {
    const Point3 T(u(rng), u(rng), u(rng)), C(u(rng), u(rng), u(rng));
    CHECK((center_to_tip_vector(T, C) + T - C).norm() < 1e-12);
  }
}

TEST_CASE("view names") {
  CHECK(view_from_string("AP") == View::AP);
  CHECK(view_from_string("lat") == View::LAT);
  CHECK(to_string(View::LAT) == "LAT");
  CHECK_THROWS_AS(view_from_string("oblique"), Error);
}
