#include "doctest.h"
#include "oracles.hpp"

#include "screwreg/error.hpp"
#include "screwreg/phantom.hpp"
#include "screwreg/render.hpp"
#include "screwreg/similarity.hpp"

#include <map>
#include <random>

using namespace screwreg;

namespace {

struct NoisyTriangulation {
  double residual = 0;  // mean ||A x - b||
  double error_mm = 0;  // mean distance to the true point
};

NoisyTriangulation noisy_triangulation(double separation_deg, std::uint64_t seed) {
  RigSpec rig;
  rig.separation_deg = separation_deg;
  const auto [ap, lat] = make_rig(rig);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-40, 40);
  std::normal_distribution<double> px(0, 1);
  NoisyTriangulation out;
  for (int k = 0; k < 1000; ++k) {
    const Point3 X(u(rng), u(rng), u(rng));
    const Point2 a = project_point(ap, X) + Point2(px(rng), px(rng));
    const Point2 l = project_point(lat, X) + Point2(px(rng), px(rng));
    const Triangulation t = triangulate(ap, lat, a, l);
    out.residual += t.residual / 1000;
    out.error_mm += (t.point - X).norm() / 1000;
  }
  return out;
}

}  // namespace

TEST_CASE("screw mesh construction") {
  const ScrewModel m = make_screw_mesh(40, 2.5, 5, 12);
  double zmin = 1e9, zmax = -1e9;
  for (const auto& v : m.mesh().vertices()) {
    zmin = std::min(zmin, v.z());
    zmax = std::max(zmax, v.z());
  }
  CHECK(zmin == 0.0);
  CHECK(zmax == 40.0);
  CHECK(m.canonical_tip() == Point3(0, 0, 0));
  CHECK(m.canonical_center() == Point3(0, 0, 20));
  CHECK_THROWS_AS(make_screw_mesh(40, 2.5, 5, 5), Error);
  CHECK_THROWS_AS(make_screw_mesh(-1, 2.5, 5, 12), Error);
  CHECK_THROWS_AS(make_screw_mesh(40, 6, 5, 12), Error);
}

TEST_CASE("screw mesh is watertight") {
  for (int segments : {6, 12, 24}) {
    const ScrewModel m = make_screw_mesh(40, 2.5, 5, segments);
    std::map<std::pair<int, int>, int> edges;
    for (const auto& f : m.mesh().faces()) {
      for (int k = 0; k < 3; ++k) {
        const int a = f[k], b = f[(k + 1) % 3];
        ++edges[{std::min(a, b), std::max(a, b)}];
      }
    }
    for (const auto& [e, count] : edges) CHECK(count == 2);
    // Euler characteristic of a closed sphere-like surface.
    CHECK(static_cast<long>(m.mesh().vertex_count()) - static_cast<long>(edges.size()) +
              static_cast<long>(m.mesh().face_count()) ==
          2);
  }
}

TEST_CASE("side silhouette area matches the analytic outline") {
  const ScrewModel m = make_screw_mesh(40, 2.5, 5, 12);
  // Orthographic view along -x at 10 px/mm: image u = 10 y + 100, v = 10 z + 20.
  Mat34 P;
  P << 0, 10, 0, 100, 0, 0, 10, 20, 0, 0, 0, 1;
  const BinaryMask sil = rasterize(m.mesh(), ProjectionMatrix(P), 200, 440);
  const double area_mm2 = count_ones(sil) / 100.0;
  const double analytic = 2 * 2.5 * 28 + 2 * 5 * 12;
  CHECK(std::abs(area_mm2 - analytic) / analytic < 0.05);
}

TEST_CASE("rig geometry") {
  const RigSpec rig;
  const auto [ap, lat] = make_rig(rig);
  CHECK(ap.label() == View::AP);
  CHECK(lat.label() == View::LAT);
  for (double z : {-100.0, 0.0, 50.0, 200.0}) {
    const Point2 c = project_point(ap, Point3(0, 0, z));
    CHECK(std::abs(c.x() - 128) < 1e-9);
    CHECK(std::abs(c.y() - 128) < 1e-9);
  }
  // The LAT optical axis is AP's rotated about +Y by the separation.
  const Point2 c = project_point(lat, Point3(-std::sin(M_PI / 2) * 30, 0, std::cos(M_PI / 2) * 30));
  CHECK(std::abs(c.x() - 128) < 1e-9);
  // Isocenter magnification is SDD / SID at pitch 0.8.
  const Point2 off = project_point(ap, Point3(10, 0, 0));
  CHECK(off.x() - 128 == doctest::Approx(10 * 1000.0 / 600.0 / 0.8));

  RigSpec bad = rig;
  bad.separation_deg = 5;
  CHECK_THROWS_AS(make_rig(bad), Error);
  bad = rig;
  bad.source_to_isocenter_mm = 1200;
  CHECK_THROWS_AS(make_rig(bad), Error);
}

TEST_CASE("rigs triangulate their own projections") {
  std::mt19937_64 rng(71);
  std::uniform_real_distribution<double> sep(20, 160), u(-40, 40);
  for (int k = 0; k < 200; ++k) {
    RigSpec rig;
    rig.separation_deg = sep(rng);
    const auto [ap, lat] = make_rig(rig);
    const Point3 X(u(rng), u(rng), u(rng));
    const Triangulation t = triangulate(ap, lat, project_point(ap, X), project_point(lat, X));
    CHECK((t.point - X).norm() < 1e-6);
  }
}

TEST_CASE("narrower separation amplifies landmark noise") {
  const NoisyTriangulation r90 = noisy_triangulation(90, 72), r60 = noisy_triangulation(60, 72);
  MESSAGE("90 deg: residual " << r90.residual << ", error " << r90.error_mm << " mm; 60 deg: residual "
                              << r60.residual << ", error " << r60.error_mm << " mm");
  CHECK(r60.error_mm > r90.error_mm);
}

TEST_CASE("render_scene") {
  const PhantomSpec spec = random_spec(81, 2);

  SUBCASE("landmarks are exact projections") {
    const PhantomScene ph = render_scene(spec);
    const ScrewModel& m = *ph.scene.model;
    for (View v : {View::AP, View::LAT}) {
      const auto& view = ph.scene.view(v);
      for (std::size_t i = 0; i < 2; ++i) {
        const std::size_t idx = v == View::AP ? i : static_cast<std::size_t>(ph.true_combination.lat_of(i));
        const Point3 tip = apply_pose(m.canonical_tip(), ph.true_poses[i], m.canonical_tip());
        const Point3 center = apply_pose(m.canonical_center(), ph.true_poses[i], m.canonical_tip());
        CHECK((project_point(view.projection, tip) - view.landmarks[idx].tip).norm() < 1e-9);
        CHECK((project_point(view.projection, center) - view.landmarks[idx].center).norm() < 1e-9);
      }
    }
  }

  SUBCASE("same spec gives identical scenes") {
    const PhantomScene a = render_scene(spec), b = render_scene(spec);
    for (View v : {View::AP, View::LAT}) {
      CHECK(a.scene.view(v).image == b.scene.view(v).image);
      CHECK(a.scene.view(v).foreground == b.scene.view(v).foreground);
    }
    CHECK(a.true_combination == b.true_combination);
    PhantomSpec other = spec;
    other.seed += 1;
    CHECK_FALSE(render_scene(other).scene.view(View::AP).image == a.scene.view(View::AP).image);
  }

  SUBCASE("without noise and blur the image is the mask") {
    PhantomSpec clean = spec;
    clean.noise_sigma = 0;
    clean.blur_radius = 0;
    const PhantomScene ph = render_scene(clean);
    for (View v : {View::AP, View::LAT}) {
      CHECK(ph.scene.view(v).image == to_gray(ph.scene.view(v).foreground));
      CHECK(count_ones(ph.scene.view(v).background) == ph.scene.view(v).background.size());
    }
  }

  SUBCASE("noisy images stay in range") {
    const PhantomScene ph = render_scene(spec);
    for (double p : ph.scene.view(View::LAT).image.pixels()) {
      CHECK(p >= 0.0);
      CHECK(p <= 1.0);
    }
  }

  SUBCASE("background holes zero the mask") {
    PhantomSpec holes = spec;
    holes.background_holes.push_back({0, 0, 10, 20});
    const PhantomScene ph = render_scene(holes);
    CHECK(count_ones(ph.scene.view(View::AP).background) == 256 * 256 - 200);
  }

  SUBCASE("landmark noise jitters the exported landmarks only") {
    PhantomSpec noisy = spec;
    noisy.landmark_noise_px = 1.0;
    const PhantomScene a = render_scene(spec), b = render_scene(noisy);
    CHECK(a.scene.view(View::AP).image == b.scene.view(View::AP).image);
    const double d = (a.scene.view(View::AP).landmarks[0].tip - b.scene.view(View::AP).landmarks[0].tip).norm();
    CHECK(d > 0.0);
    CHECK(d < 6.0);
  }

  SUBCASE("screws out of view and invalid specs") {
    PhantomSpec far = spec;
    far.true_poses[0].translation.x() += 500;
    CHECK_THROWS_AS(render_scene(far), Error);
    PhantomSpec bad = spec;
    bad.rig.separation_deg = 175;
    CHECK_THROWS_AS(render_scene(bad), Error);
    bad = spec;
    bad.true_poses.clear();
    CHECK_THROWS_AS(render_scene(bad), Error);
    bad = spec;
    bad.true_poses[1] = bad.true_poses[0];
    CHECK_THROWS_AS(render_scene(bad), Error);
    bad.require_separation = false;
    CHECK_NOTHROW(render_scene(bad));
  }
}

TEST_CASE("random specs are deterministic and separated") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const PhantomSpec a = random_spec(seed, 2), b = random_spec(seed, 2);
    CHECK(a.true_poses == b.true_poses);
    CHECK_NOTHROW(render_scene(a));
  }
  CHECK_THROWS_AS(random_spec(1, 0), Error);
  CHECK_THROWS_AS(random_spec(1, 5), Error);
}

TEST_CASE("perturb stays inside its box") {
  const RigidPose base{10, -20, 30, Vec3(1, 2, 3)};
  CHECK(perturb(base, 0, 0, 5) == base);
  CHECK(perturb(base, 10, 5, 5) == perturb(base, 10, 5, 5));
  CHECK_FALSE(perturb(base, 10, 5, 5) == perturb(base, 10, 5, 6));
  double max_rot = 0, max_trans = 0;
  for (std::uint64_t s = 0; s < 1000; ++s) {
    const RigidPose p = perturb(base, 10, 5, s);
    max_rot = std::max({max_rot, std::abs(p.rz - base.rz), std::abs(p.ry - base.ry), std::abs(p.rx - base.rx)});
    max_trans = std::max(max_trans, (p.translation - base.translation).cwiseAbs().maxCoeff());
  }
  CHECK(max_rot <= 10);
  CHECK(max_trans <= 5);
  CHECK(max_rot > 9);
  CHECK(max_trans > 4.5);
  CHECK_THROWS_AS(perturb(base, -1, 0, 0), Error);
}

TEST_CASE("perturb_about_tip moves the tip by at most the translation box") {
  const ScrewModel m = make_screw_mesh(ScrewGeometry{});
  const RigidPose base{10, -20, 30, Vec3(1, 2, 3)};
  for (std::uint64_t s = 0; s < 200; ++s) {
    const RigidPose p = perturb_about_tip(m, base, 10, 5, s);
    const Vec3 d = apply_pose(m.canonical_tip(), p, m.canonical_tip()) - apply_pose(m.canonical_tip(), base, m.canonical_tip());
    CHECK(d.cwiseAbs().maxCoeff() <= 5 + 1e-9);
    const PoseError e = pose_error(m, p, base);
    CHECK(e.axis_deg <= 10 * std::sqrt(3.0) + 1e-9);
  }
  CHECK(pose_error(m, base, base).tip_mm == 0.0);
  CHECK(pose_error(m, base, base).axis_deg == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("box blur") {
  GrayImage img(5, 5, 0.0);
  img(2, 2) = 9;
  const GrayImage b = box_blur(img, 1);
  CHECK(b(2, 2) == doctest::Approx(1.0));
  CHECK(b(1, 1) == doctest::Approx(1.0));
  CHECK(b(0, 0) == 0.0);
  CHECK(box_blur(img, 0) == img);
  const GrayImage flat = box_blur(GrayImage(7, 4, 0.3), 2);
  for (double p : flat.pixels()) CHECK(p == doctest::Approx(0.3));
}

// Registered as its own ctest entry.
TEST_CASE("noisy real images correlate with their foreground") {
  double worst = -1;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const PhantomScene ph = render_scene(random_spec(seed, 2));
    for (View v : {View::AP, View::LAT}) {
      worst = std::max(worst, gcl(ph.scene.view(v).foreground, ph.scene.view(v).image));
    }
  }
  MESSAGE("worst gcl(foreground, real) over 100 scenes: " << worst);
  CHECK(worst <= -0.8);
}
