#include "screwreg/phantom.hpp"

#include "screwreg/correspondence.hpp"
#include "screwreg/error.hpp"
#include "screwreg/registration.hpp"
#include "screwreg/render.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

namespace screwreg {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;
// Outward bulge of the notched head column, relative to the head radius.
constexpr double kNotchScale = 1.6;

double segment_distance_2d(const Point2& p0, const Point2& p1, const Point2& q0, const Point2& q1) {
  auto cross = [](const Point2& a, const Point2& b) { return a.x() * b.y() - a.y() * b.x(); };
  const Point2 r = p1 - p0, s = q1 - q0;
  const double denom = cross(r, s);
  if (denom != 0.0) {
    const double t = cross(q0 - p0, s) / denom;
    const double u = cross(q0 - p0, r) / denom;
    if (t >= 0.0 && t <= 1.0 && u >= 0.0 && u <= 1.0) return 0.0;
  }
  auto point_seg = [](const Point2& p, const Point2& a, const Point2& b) {
    const Point2 ab = b - a;
    const double len2 = ab.squaredNorm();
    const double t = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
    return (p - (a + t * ab)).norm();
  };
  return std::min({point_seg(p0, q0, q1), point_seg(p1, q0, q1), point_seg(q0, p0, p1), point_seg(q1, p0, p1)});
}

}  // namespace

void PhantomSpec::validate() const {
  const auto& r = rig;
  if (r.width < 3 || r.height < 3) fail(ErrorCode::InvalidSpec, "image must be at least 3x3");
  if (!(r.source_to_detector_mm > 0.0 && r.source_to_isocenter_mm > 0.0 &&
        r.source_to_isocenter_mm < r.source_to_detector_mm)) {
    fail(ErrorCode::InvalidSpec, "require 0 < source-to-isocenter < source-to-detector");
  }
  if (!(r.separation_deg > 10.0 && r.separation_deg < 170.0)) fail(ErrorCode::InvalidSpec, "view separation must lie in (10, 170) degrees");
  if (!(r.pixel_pitch_mm > 0.0)) fail(ErrorCode::InvalidSpec, "pixel pitch must be positive");
  if (!(screw.length_mm > 0.0 && screw.shaft_radius_mm > 0.0 && screw.head_radius_mm > 0.0)) {
    fail(ErrorCode::InvalidSpec, "screw dimensions must be positive");
  }
  if (true_poses.empty()) fail(ErrorCode::InvalidSpec, "phantom needs at least one screw");
  if (!(noise_sigma >= 0.0) || blur_radius < 0) fail(ErrorCode::InvalidSpec, "noise and blur must be non-negative");
  if (!(landmark_noise_px >= 0.0)) fail(ErrorCode::InvalidSpec, "landmark noise must be non-negative");
}

std::pair<ProjectionMatrix, ProjectionMatrix> make_rig(const RigSpec& rig) {
  if (!(rig.separation_deg > 10.0 && rig.separation_deg < 170.0)) fail(ErrorCode::InvalidSpec, "view separation must lie in (10, 170) degrees");
  if (!(rig.pixel_pitch_mm > 0.0 && rig.source_to_isocenter_mm > 0.0 && rig.source_to_detector_mm > rig.source_to_isocenter_mm)) {
    fail(ErrorCode::InvalidSpec, "invalid rig distances");
  }
  const double f = rig.source_to_detector_mm / rig.pixel_pitch_mm;
  Eigen::Matrix3d K;
  K << f, 0.0, rig.width / 2.0, 0.0, f, rig.height / 2.0, 0.0, 0.0, 1.0;

  auto camera = [&](double angle_deg, View label) {
    const double a = angle_deg * kDeg;
    Eigen::Matrix3d R;
    R.row(0) = Vec3(std::cos(a), 0.0, -std::sin(a)).transpose();
    R.row(1) = Vec3(0.0, 1.0, 0.0).transpose();
    R.row(2) = Vec3(std::sin(a), 0.0, std::cos(a)).transpose();
    Eigen::Matrix<double, 3, 4> Rt;
    Rt.leftCols<3>() = R;
    Rt.col(3) = Vec3(0.0, 0.0, rig.source_to_isocenter_mm);
    return ProjectionMatrix(K * Rt, label);
  };
  return {camera(0.0, View::AP), camera(rig.separation_deg, View::LAT)};
}

ScrewModel make_screw_mesh(double length, double shaft_radius, double head_radius, int segments, double head_fraction) {
  if (!(length > 0.0 && shaft_radius > 0.0 && head_radius > 0.0)) fail(ErrorCode::InvalidSpec, "screw dimensions must be positive");
  if (!(head_radius > shaft_radius)) fail(ErrorCode::InvalidSpec, "head radius must exceed shaft radius");
  if (segments < 6) fail(ErrorCode::InvalidSpec, "need at least 6 segments");
  if (!(head_fraction > 0.0 && head_fraction < 1.0)) fail(ErrorCode::InvalidSpec, "head fraction must lie in (0, 1)");

  const auto n = static_cast<std::uint32_t>(segments);
  const double z_head = length * (1.0 - head_fraction);
  std::vector<Point3> v;
  v.emplace_back(0.0, 0.0, 0.0);
  auto ring = [&](double z, double r, bool notched) {
    for (std::uint32_t k = 0; k < n; ++k) {
      const double a = 2.0 * std::numbers::pi * k / n;
      const double rr = (notched && k == 0) ? r * kNotchScale : r;
      v.emplace_back(rr * std::cos(a), rr * std::sin(a), z);
    }
  };
  ring(0.0, shaft_radius, false);     // A: tip ring
  ring(z_head, shaft_radius, false);  // B: shaft top
  ring(z_head, head_radius, true);    // C: head bottom
  ring(length, head_radius, true);    // D: head top
  v.emplace_back(0.0, 0.0, length);
  const std::uint32_t top = static_cast<std::uint32_t>(v.size() - 1);
  auto A = [n](std::uint32_t k) { return 1 + k % n; };
  auto B = [n](std::uint32_t k) { return 1 + n + k % n; };
  auto C = [n](std::uint32_t k) { return 1 + 2 * n + k % n; };
  auto D = [n](std::uint32_t k) { return 1 + 3 * n + k % n; };

  std::vector<Face> f;
  for (std::uint32_t k = 0; k < n; ++k) {
    f.push_back({0, A(k + 1), A(k)});
    f.push_back({A(k), A(k + 1), B(k + 1)});
    f.push_back({A(k), B(k + 1), B(k)});
    f.push_back({B(k), B(k + 1), C(k + 1)});
    f.push_back({B(k), C(k + 1), C(k)});
    f.push_back({C(k), C(k + 1), D(k + 1)});
    f.push_back({C(k), D(k + 1), D(k)});
    f.push_back({top, D(k), D(k + 1)});
  }
  return ScrewModel(TriMesh(std::move(v), std::move(f)), Point3::Zero(), Point3(0.0, 0.0, length / 2.0));
}

ScrewModel make_screw_mesh(const ScrewGeometry& g) {
  return make_screw_mesh(g.length_mm, g.shaft_radius_mm, g.head_radius_mm, g.segments, g.head_fraction);
}

GrayImage box_blur(const GrayImage& img, int radius) {
  if (radius <= 0) return img;
  const int w = img.width(), h = img.height();
  GrayImage tmp(w, h), out(w, h);
  // Separable: the in-bounds window is a product of x and y ranges.
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double s = 0.0;
      const int lo = std::max(0, x - radius), hi = std::min(w - 1, x + radius);
      for (int k = lo; k <= hi; ++k) s += img(k, y);
      tmp(x, y) = s / (hi - lo + 1);
    }
  }
  for (int y = 0; y < h; ++y) {
    const int lo = std::max(0, y - radius), hi = std::min(h - 1, y + radius);
    for (int x = 0; x < w; ++x) {
      double s = 0.0;
      for (int k = lo; k <= hi; ++k) s += tmp(x, k);
      out(x, y) = s / (hi - lo + 1);
    }
  }
  return out;
}

PhantomScene render_scene(const PhantomSpec& spec) {
  spec.validate();
  auto model = std::make_shared<const ScrewModel>(make_screw_mesh(spec.screw));
  const auto [P_ap, P_lat] = make_rig(spec.rig);
  const std::size_t n = spec.true_poses.size();
  const int w = spec.rig.width, h = spec.rig.height;

  PhantomScene out;
  out.true_poses = spec.true_poses;
  out.scene.model = model;

  std::vector<int> lat_of(n);
  std::iota(lat_of.begin(), lat_of.end(), 0);
  if (spec.shuffle_lat) {
    std::mt19937_64 shuffle_rng(spec.seed ^ 0x5eed5eedULL);
    std::shuffle(lat_of.begin(), lat_of.end(), shuffle_rng);
  }
  out.true_combination.mapping = lat_of;
  for (const auto& c : enumerate_combinations(n)) {
    if (c.mapping == lat_of) out.true_combination.label = c.label;
  }

  std::mt19937_64 noise_rng(spec.seed);
  std::normal_distribution<double> noise(0.0, spec.noise_sigma > 0.0 ? spec.noise_sigma : 1.0);

  for (const auto view : {View::AP, View::LAT}) {
    const ProjectionMatrix& P = view == View::AP ? P_ap : P_lat;
    auto& data = out.scene.view(view);
    data.projection = P;
    data.foreground = BinaryMask(w, h, 0);
    data.landmarks.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const TriMesh posed = apply_pose(model->mesh(), spec.true_poses[i], model->canonical_tip());
      for (const auto& vtx : posed.vertices()) {
        const Eigen::Vector3d hom = P.rows() * vtx.homogeneous();
        if (!(hom.z() > 1e-9)) fail(ErrorCode::ScrewOutOfView, "screw " + std::to_string(i) + " behind the " + std::string(to_string(view)) + " source");
        const double u = hom.x() / hom.z(), vv = hom.y() / hom.z();
        if (u < 0.0 || u > w || vv < 0.0 || vv > h) {
          fail(ErrorCode::ScrewOutOfView, "screw " + std::to_string(i) + " leaves the " + std::string(to_string(view)) + " field of view");
        }
      }
      rasterize_into(data.foreground, posed.vertices(), posed.faces(), P.rows());
      const std::size_t slot = view == View::AP ? i : static_cast<std::size_t>(lat_of[i]);
      data.landmarks[slot].tip = project_point(P, apply_pose(model->canonical_tip(), spec.true_poses[i], model->canonical_tip()));
      data.landmarks[slot].center = project_point(P, apply_pose(model->canonical_center(), spec.true_poses[i], model->canonical_tip()));
    }

    GrayImage real = box_blur(to_gray(data.foreground), spec.blur_radius);
    if (spec.noise_sigma > 0.0) {
      for (auto& px : real.pixels()) px = std::clamp(px + noise(noise_rng), 0.0, 1.0);
    }
    data.image = std::move(real);
    data.background = BinaryMask(w, h, 1);
    for (const auto& r : spec.background_holes) {
      for (int y = std::max(r.y0, 0); y < std::min(r.y1, h); ++y)
        for (int x = std::max(r.x0, 0); x < std::min(r.x1, w); ++x) data.background(x, y) = 0;
    }
  }

  if (spec.landmark_noise_px > 0.0) {
    std::mt19937_64 rng(spec.seed ^ 0x1a4d3a4cULL);
    std::normal_distribution<double> jitter(0.0, spec.landmark_noise_px);
    for (auto& view : out.scene.views) {
      for (auto& lm : view.landmarks) {
        lm.tip += Point2(jitter(rng), jitter(rng));
        lm.center += Point2(jitter(rng), jitter(rng));
      }
    }
  }

  if (spec.require_separation && n > 1) {
    const double head_px = spec.screw.head_radius_mm * spec.rig.source_to_detector_mm /
                           spec.rig.source_to_isocenter_mm / spec.rig.pixel_pitch_mm;
    for (const auto view : {View::AP, View::LAT}) {
      const ProjectionMatrix& P = out.scene.view(view).projection;
      std::vector<std::pair<Point2, Point2>> axes;
      for (const auto& pose : spec.true_poses) {
        axes.emplace_back(project_point(P, apply_pose(model->canonical_tip(), pose, model->canonical_tip())),
                          project_point(P, apply_pose(Point3(0.0, 0.0, spec.screw.length_mm), pose, model->canonical_tip())));
      }
      for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a + 1; b < n; ++b) {
          if (segment_distance_2d(axes[a].first, axes[a].second, axes[b].first, axes[b].second) <= 2.0 * head_px) {
            fail(ErrorCode::InvalidSpec, "screws " + std::to_string(a) + " and " + std::to_string(b) +
                                             " are closer than two head radii in the " + std::string(to_string(view)) + " view");
          }
        }
      }
    }
  }
  return out;
}

RigidPose perturb(const RigidPose& pose, double max_rot_deg, double max_trans_mm, std::uint64_t seed) {
  if (!(max_rot_deg >= 0.0 && max_trans_mm >= 0.0)) fail(ErrorCode::InvalidArgument, "perturbation magnitudes must be non-negative");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  RigidPose out = pose;
  out.rz += max_rot_deg * unit(rng);
  out.ry += max_rot_deg * unit(rng);
  out.rx += max_rot_deg * unit(rng);
  for (int k = 0; k < 3; ++k) out.translation(k) += max_trans_mm * unit(rng);
  return out;
}

RigidPose perturb_about_tip(const ScrewModel& model, const RigidPose& pose, double max_rot_deg, double max_trans_mm,
                            std::uint64_t seed) {
  const RigidPose offset = perturb(RigidPose::identity(), max_rot_deg, max_trans_mm, seed);
  const Eigen::Isometry3d base = model_transform(model, pose);
  const Point3 tip_world = base * model.canonical_tip();
  return pose_from_transform(offset.transform(tip_world) * base, model.canonical_tip());
}

PhantomSpec random_spec(std::uint64_t seed, std::size_t screws) {
  if (screws < 1 || screws > 4) fail(ErrorCode::InvalidArgument, "random phantoms support 1 to 4 screws");
  std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ULL + 17);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };
  const ScrewModel model = make_screw_mesh(ScrewGeometry{});

  for (int attempt = 0; attempt < 200; ++attempt) {
    PhantomSpec spec;
    spec.seed = seed;
    const double z0 = uniform(-5.0, 5.0);
    for (std::size_t i = 0; i < screws; ++i) {
      const double side = (i % 2 == 0) ? -1.0 : 1.0;
      const Point3 tip(side * uniform(6.0, 12.0), -20.0 + 16.0 * static_cast<double>(i) + uniform(-3.0, 3.0),
                       z0 - static_cast<double>(i) * uniform(12.0, 20.0));
      Vec3 dir = Vec3(side * 0.5, 0.7, 0.5).normalized();
      // Tilt by up to 15 degrees about a random axis orthogonal to dir.
      const Vec3 ortho = dir.cross(Vec3(uniform(-1, 1), uniform(-1, 1), uniform(-1, 1))).normalized();
      dir = Eigen::AngleAxisd(uniform(0.0, 15.0) * kDeg, ortho) * dir;
      const double axial = uniform(0.0, 360.0);
      spec.true_poses.push_back(align_to_landmarks(model, tip, tip + dir * model.tip_to_center_length(), axial));
    }
    try {
      render_scene(spec);
      return spec;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::InvalidSpec && e.code() != ErrorCode::ScrewOutOfView) throw;
    }
  }
  fail(ErrorCode::InvalidSpec, "could not sample a separated phantom");
}

PoseError pose_error(const ScrewModel& model, const RigidPose& estimate, const RigidPose& truth) {
  const auto Te = model_transform(model, estimate);
  const auto Tt = model_transform(model, truth);
  const Vec3 axis = model.canonical_axis();
  return {(Te * model.canonical_tip() - Tt * model.canonical_tip()).norm(),
          axis_angle_deg(Te.linear() * axis, Tt.linear() * axis)};
}

}  // namespace screwreg
