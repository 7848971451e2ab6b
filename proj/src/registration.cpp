#include "screwreg/registration.hpp"

#include "screwreg/error.hpp"
#include "screwreg/render.hpp"

namespace screwreg {

RigidPose pose_slice(std::span<const double> theta, std::size_t screw) {
  const auto* p = theta.data() + kPoseDof * screw;
  return {p[0], p[1], p[2], Vec3(p[3], p[4], p[5])};
}

void set_pose_slice(PoseVector& theta, std::size_t screw, const RigidPose& pose) {
  auto* p = theta.data() + kPoseDof * screw;
  p[0] = pose.rz;
  p[1] = pose.ry;
  p[2] = pose.rx;
  p[3] = pose.translation.x();
  p[4] = pose.translation.y();
  p[5] = pose.translation.z();
}

PoseBounds pose_bounds(std::size_t screws, double rot_deg, double trans_mm) {
  PoseBounds b;
  for (std::size_t s = 0; s < screws; ++s) {
    for (int k = 0; k < 3; ++k) {
      b.lo.push_back(-rot_deg);
      b.hi.push_back(rot_deg);
    }
    for (int k = 0; k < 3; ++k) {
      b.lo.push_back(-trans_mm);
      b.hi.push_back(trans_mm);
    }
  }
  b.validate();
  return b;
}

RigidPose pose_from_transform(const Eigen::Isometry3d& T, const Point3& pivot) {
  return pose_from(T.linear(), T * pivot - pivot);
}

Eigen::Isometry3d model_transform(const ScrewModel& model, const RigidPose& pose) {
  return pose.transform(model.canonical_tip());
}

SceneRenderer::SceneRenderer(const ScrewScene& scene) : scene_(&scene) {
  scene.validate();
  for (const auto v : {View::AP, View::LAT}) {
    const auto& data = scene.view(v);
    correlation_[static_cast<int>(v)] = GradientCorrelation(data.image);
    full_background_[static_cast<int>(v)] = count_ones(data.background) == data.background.size();
  }
}

BinaryMask SceneRenderer::render(View view, std::span<const Eigen::Isometry3d> transforms, PixelBox* box) const {
  const auto& data = scene_->view(view);
  const auto& mesh = scene_->model->mesh();
  BinaryMask mask(data.image.width(), data.image.height(), 0);
  PixelBox touched;
  for (const auto& T : transforms) {
    const Mat34 camera = data.projection.rows() * T.matrix();
    touched.merge(rasterize_into(mask, mesh.vertices(), mesh.faces(), camera));
  }
  if (!touched.empty() && !full_background_[static_cast<int>(view)]) {
    for (int y = touched.y0; y <= touched.y1; ++y)
      for (int x = touched.x0; x <= touched.x1; ++x) mask(x, y) = static_cast<std::uint8_t>(mask(x, y) * data.background(x, y));
  }
  if (box) *box = touched;
  return mask;
}

LossReport SceneRenderer::loss(std::span<const Eigen::Isometry3d> transforms) const {
  std::array<double, 2> l{};
  for (const auto v : {View::AP, View::LAT}) {
    PixelBox box;
    const auto mask = render(v, transforms, &box);
    l[static_cast<int>(v)] = correlation_[static_cast<int>(v)](mask, box);
  }
  return LossReport::from(l[0], l[1]);
}

std::array<double, 2> SceneRenderer::dice(std::span<const Eigen::Isometry3d> transforms) const {
  std::array<double, 2> d{};
  for (const auto v : {View::AP, View::LAT}) d[static_cast<int>(v)] = screwreg::dice(render(v, transforms), scene_->view(v).foreground);
  return d;
}

RegistrationProblem::RegistrationProblem(const SceneRenderer& renderer, std::vector<RigidPose> initial_poses)
    : renderer_(&renderer), initial_(std::move(initial_poses)) {
  const auto& model = *renderer.scene().model;
  for (const auto& p : initial_) {
    initial_tf_.push_back(model_transform(model, p));
    pivots_.push_back(initial_tf_.back() * model.canonical_tip());
  }
}

std::vector<Eigen::Isometry3d> RegistrationProblem::transforms(std::span<const double> theta) const {
  if (theta.size() != dimension()) fail(ErrorCode::InvalidArgument, "pose vector has wrong length");
  std::vector<Eigen::Isometry3d> out;
  out.reserve(initial_.size());
  for (std::size_t s = 0; s < initial_.size(); ++s) out.push_back(pose_slice(theta, s).transform(pivots_[s]) * initial_tf_[s]);
  return out;
}

std::vector<RigidPose> RegistrationProblem::poses(std::span<const double> theta) const {
  const auto tfs = transforms(theta);
  std::vector<RigidPose> out;
  for (const auto& T : tfs) out.push_back(pose_from_transform(T, renderer_->scene().model->canonical_tip()));
  return out;
}

LossReport RegistrationProblem::objective(std::span<const double> theta) const {
  return renderer_->loss(transforms(theta));
}

std::array<double, 2> RegistrationProblem::dice(std::span<const double> theta) const {
  return renderer_->dice(transforms(theta));
}

RegistrationResult register_poses(const RegistrationProblem& problem, const RegistrationOptions& options) {
  const std::size_t n = problem.screw_count();
  RegistrationResult result;
  result.best_pose.assign(problem.dimension(), 0.0);
  result.initial_loss = problem.objective(result.best_pose);

  if (options.joint || n == 1) {
    const auto bounds = pose_bounds(n, options.bounds_rot_deg, options.bounds_trans_mm);
    auto f = [&problem](std::span<const double> theta) { return problem.objective(theta).mean_loss; };
    auto de = differential_evolution(f, bounds, options.de, result.best_pose);
    result.best_pose = std::move(de.best);
    result.history = std::move(de.history);
    result.generations_run = de.generations_run;
    result.evaluations = de.evaluations;
  } else {
    const auto bounds = pose_bounds(1, options.bounds_rot_deg, options.bounds_trans_mm);
    for (std::size_t s = 0; s < n; ++s) {
      PoseVector theta = result.best_pose;
      auto f = [&problem, &theta, s](std::span<const double> slice) {
        PoseVector full = theta;
        std::copy(slice.begin(), slice.end(), full.begin() + static_cast<std::ptrdiff_t>(kPoseDof * s));
        return problem.objective(full).mean_loss;
      };
      DEConfig cfg = options.de;
      cfg.seed = options.de.seed + s;
      const std::vector<double> start(theta.begin() + static_cast<std::ptrdiff_t>(kPoseDof * s),
                                      theta.begin() + static_cast<std::ptrdiff_t>(kPoseDof * (s + 1)));
      auto de = differential_evolution(f, bounds, cfg, start);
      std::copy(de.best.begin(), de.best.end(), result.best_pose.begin() + static_cast<std::ptrdiff_t>(kPoseDof * s));
      if (s > 0 && !de.history.empty()) de.history.erase(de.history.begin());
      result.history.insert(result.history.end(), de.history.begin(), de.history.end());
      result.generations_run += de.generations_run;
      result.evaluations += de.evaluations;
    }
  }

  result.loss = problem.objective(result.best_pose);
  result.poses = problem.poses(result.best_pose);
  const auto d = problem.dice(result.best_pose);
  result.dice_ap = d[0];
  result.dice_lat = d[1];
  return result;
}

}  // namespace screwreg
