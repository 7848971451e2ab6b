#pragma once

#include "screwreg/scene.hpp"

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

namespace screwreg {

struct RigSpec {
  int width = 256;
  int height = 256;
  double source_to_detector_mm = 1000.0;
  double source_to_isocenter_mm = 600.0;
  double separation_deg = 90.0;  // angle between the AP and LAT optical axes
  double pixel_pitch_mm = 0.8;
};

struct ScrewGeometry {
  double length_mm = 40.0;
  double shaft_radius_mm = 2.5;
  double head_radius_mm = 5.0;
  double head_fraction = 0.3;  // head occupies the last fraction of the length
  int segments = 12;
};

/// Rectangle [x0, x1) x [y0, y1) zeroed in a background mask.
struct PixelRect {
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;
};

struct PhantomSpec {
  RigSpec rig;
  ScrewGeometry screw;
  std::vector<RigidPose> true_poses;  // pivot = canonical tip
  double noise_sigma = 0.05;
  int blur_radius = 1;
  double landmark_noise_px = 0.0;  // Gaussian jitter on the exported landmarks, mimicking manual annotation
  std::uint64_t seed = 0;
  bool shuffle_lat = true;         // permute LAT landmark order so the true pairing is not always identity
  bool require_separation = true;  // reject screws closer than 2 head radii in either projection
  std::vector<PixelRect> background_holes;

  void validate() const;
};

struct PhantomScene {
  ScrewScene scene;
  std::vector<RigidPose> true_poses;
  Combination true_combination;
};

/// AP looks along +Z; LAT is AP rotated by the separation angle about +Y.
/// Principal points sit at the image center; focal length SDD / pitch pixels.
std::pair<ProjectionMatrix, ProjectionMatrix> make_rig(const RigSpec& rig);

/// Capped shaft plus wider head along +Z, tip at the origin, center at
/// (0, 0, length / 2). One head vertex column bulges outward so axial rotation
/// changes the silhouette.
ScrewModel make_screw_mesh(double length, double shaft_radius, double head_radius, int segments,
                           double head_fraction = 0.3);
ScrewModel make_screw_mesh(const ScrewGeometry& g);

PhantomScene render_scene(const PhantomSpec& spec);

/// Uniform offsets in [-max, max] on each Euler angle and translation component.
RigidPose perturb(const RigidPose& pose, double max_rot_deg, double max_trans_mm, std::uint64_t seed);

/// Perturbs in the optimizer's offset space: a random offset pose (per
/// perturb) is applied after `pose`, pivoted at the posed tip.
RigidPose perturb_about_tip(const ScrewModel& model, const RigidPose& pose, double max_rot_deg, double max_trans_mm,
                            std::uint64_t seed);

/// Randomized two-view scene with screws at distinct vertebral levels that
/// satisfy the separation guard. Deterministic in `seed`.
PhantomSpec random_spec(std::uint64_t seed, std::size_t screws = 2);

struct PoseError {
  double tip_mm = 0.0;
  double axis_deg = 0.0;
};
PoseError pose_error(const ScrewModel& model, const RigidPose& estimate, const RigidPose& truth);

/// Mean filter over a (2r+1)^2 window, averaging in-bounds pixels only.
GrayImage box_blur(const GrayImage& img, int radius);

}  // namespace screwreg
