#pragma once

#include "screwreg/differential_evolution.hpp"
#include "screwreg/scene.hpp"
#include "screwreg/similarity.hpp"

#include <array>
#include <span>
#include <vector>

namespace screwreg {

/// Flat per-screw [rz, ry, rx (deg), tx, ty, tz (mm)] blocks.
using PoseVector = std::vector<double>;
using PoseBounds = Bounds;

inline constexpr std::size_t kPoseDof = 6;

RigidPose pose_slice(std::span<const double> theta, std::size_t screw);
void set_pose_slice(PoseVector& theta, std::size_t screw, const RigidPose& pose);

/// Symmetric box of +/- rot_deg per angle and +/- trans_mm per translation.
PoseBounds pose_bounds(std::size_t screws, double rot_deg, double trans_mm);

/// Converts a world transform back to a RigidPose pivoted at `pivot`.
RigidPose pose_from_transform(const Eigen::Isometry3d& T, const Point3& pivot);

/// Renders posed screws into both views and scores them against the real
/// images. Thread-safe for concurrent const use.
class SceneRenderer {
 public:
  explicit SceneRenderer(const ScrewScene& scene);

  const ScrewScene& scene() const { return *scene_; }

  /// Union silhouette of all screws (model-to-world transforms) times M_bg.
  BinaryMask render(View view, std::span<const Eigen::Isometry3d> transforms, PixelBox* box = nullptr) const;
  LossReport loss(std::span<const Eigen::Isometry3d> transforms) const;
  /// Per-view Dice of I_final against the foreground masks.
  std::array<double, 2> dice(std::span<const Eigen::Isometry3d> transforms) const;

 private:
  const ScrewScene* scene_;
  std::array<GradientCorrelation, 2> correlation_;
  std::array<bool, 2> full_background_{};
};

/// Model-to-world transform for a pose pivoted at the canonical tip.
Eigen::Isometry3d model_transform(const ScrewModel& model, const RigidPose& pose);

/// Screw poses of one combination around which the optimizer searches.
class RegistrationProblem {
 public:
  RegistrationProblem(const SceneRenderer& renderer, std::vector<RigidPose> initial_poses);

  std::size_t screw_count() const { return initial_.size(); }
  std::size_t dimension() const { return kPoseDof * initial_.size(); }
  const std::vector<RigidPose>& initial_poses() const { return initial_; }

  /// Absolute poses (pivot = canonical tip) for offsets theta. Each offset is
  /// applied after its screw's initial pose, pivoted at the initial world tip.
  std::vector<RigidPose> poses(std::span<const double> theta) const;
  std::vector<Eigen::Isometry3d> transforms(std::span<const double> theta) const;

  LossReport objective(std::span<const double> theta) const;
  std::array<double, 2> dice(std::span<const double> theta) const;
  const SceneRenderer& renderer() const { return *renderer_; }

 private:
  const SceneRenderer* renderer_;
  std::vector<RigidPose> initial_;
  std::vector<Eigen::Isometry3d> initial_tf_;
  std::vector<Point3> pivots_;
};

struct RegistrationOptions {
  DEConfig de;
  double bounds_rot_deg = 15.0;
  double bounds_trans_mm = 10.0;
  /// Joint 6N-DoF search; false runs one 6-DoF search per screw in order.
  bool joint = true;
};

struct RegistrationResult {
  PoseVector best_pose;                 // offsets from the initial poses
  std::vector<RigidPose> poses;         // absolute, pivot = canonical tip
  LossReport initial_loss;
  LossReport loss;
  double dice_ap = 0.0;
  double dice_lat = 0.0;
  int generations_run = 0;
  std::size_t evaluations = 0;
  std::vector<double> history;          // best mean loss per generation
};

RegistrationResult register_poses(const RegistrationProblem& problem, const RegistrationOptions& options);

}  // namespace screwreg
