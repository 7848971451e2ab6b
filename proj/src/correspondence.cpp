#include "screwreg/correspondence.hpp"

#include "screwreg/error.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>

namespace screwreg {

std::vector<Combination> enumerate_combinations(std::size_t n) {
  if (n < 1) fail(ErrorCode::InvalidArgument, "need at least one screw");
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<Combination> out;
  int label = 1;
  do out.push_back({perm, label++});
  while (std::next_permutation(perm.begin(), perm.end()));
  return out;
}

std::vector<RigidPose> CombinationInit::poses() const {
  std::vector<RigidPose> out;
  for (const auto& s : screws) out.push_back(s.pose);
  return out;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::vector<Eigen::Isometry3d> transforms_of(const ScrewModel& model, const std::vector<ScrewInit>& screws) {
  std::vector<Eigen::Isometry3d> out;
  for (const auto& s : screws) out.push_back(model_transform(model, s.pose));
  return out;
}

StageScores score(const SceneRenderer& renderer, std::span<const Eigen::Isometry3d> tfs) {
  const auto d = renderer.dice(tfs);
  return {d[0], d[1], renderer.loss(tfs)};
}

}  // namespace

CombinationInit initialize_combination(const SceneRenderer& renderer, const Combination& combo, double axial_step_deg) {
  const auto& scene = renderer.scene();
  const auto& model = *scene.model;
  const std::size_t n = scene.screw_count();
  if (combo.mapping.size() != n || !combo.is_bijection()) fail(ErrorCode::InvalidArgument, "combination is not a bijection");
  if (!(axial_step_deg > 0.0)) fail(ErrorCode::InvalidArgument, "axial step must be positive");

  const auto& ap = scene.view(View::AP);
  const auto& lat = scene.view(View::LAT);
  CombinationInit init{combo, {}, {}};
  for (std::size_t i = 0; i < n; ++i) {
    const auto& l_ap = ap.landmarks[i];
    const auto& l_lat = lat.landmarks[static_cast<std::size_t>(combo.lat_of(i))];
    try {
      const auto tip = triangulate(ap.projection, lat.projection, l_ap.tip, l_lat.tip);
      const auto center = triangulate(ap.projection, lat.projection, l_ap.center, l_lat.center);
      ScrewInit s;
      s.tip_world = tip.point;
      s.center_world = center.point;
      s.tip_residual = tip.residual;
      s.center_residual = center.residual;
      s.pose = align_to_landmarks(model, s.tip_world, s.center_world, 0.0);
      init.screws.push_back(s);
    } catch (const Error& e) {
      throw Error(e.code(), "screw " + std::to_string(i) + ": " + e.what());
    }
  }

  // Coordinate sweep over each screw's axial angle, others held at their current pick.
  auto tfs = transforms_of(model, init.screws);
  for (std::size_t i = 0; i < n; ++i) {
    auto& s = init.screws[i];
    double best_loss = 0.0;
    bool have_best = false;
    for (int k = 0; k * axial_step_deg < 360.0; ++k) {
      const double angle = k * axial_step_deg;
      const RigidPose candidate = align_to_landmarks(model, s.tip_world, s.center_world, angle);
      tfs[i] = model_transform(model, candidate);
      const double loss = renderer.loss(tfs).mean_loss;
      if (!have_best || loss < best_loss) {
        best_loss = loss;
        have_best = true;
        s.pose = candidate;
        s.axial_deg = angle;
      }
    }
    tfs[i] = model_transform(model, s.pose);
  }
  init.scores = score(renderer, tfs);
  return init;
}

std::string_view to_string(Stage stage) { return stage == Stage::Pre ? "pre" : "post"; }

Stage stage_from_string(std::string_view name) {
  if (name == "pre") return Stage::Pre;
  if (name == "post") return Stage::Post;
  fail(ErrorCode::InvalidArgument, "stage must be 'pre' or 'post'");
}

const CombinationOutcome& ClassificationResult::outcome(int label) const {
  for (const auto& o : outcomes)
    if (o.combination.label == label) return o;
  fail(ErrorCode::InvalidArgument, "no combination labeled " + std::to_string(label));
}

std::size_t select_best(const std::vector<double>& dice, const std::vector<double>& mean_loss,
                        const std::vector<int>& labels) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < dice.size(); ++i) {
    if (dice[i] > dice[best] ||
        (dice[i] == dice[best] && (mean_loss[i] < mean_loss[best] ||
                                   (mean_loss[i] == mean_loss[best] && labels[i] < labels[best])))) {
      best = i;
    }
  }
  return best;
}

CombinationRegistration register_combination(const SceneRenderer& renderer, const Combination& combo,
                                             const ClassifyOptions& options) {
  auto init = initialize_combination(renderer, combo, options.axial_step_deg);
  RegistrationProblem problem(renderer, init.poses());
  auto result = register_poses(problem, options.registration);
  return {std::move(init), std::move(result)};
}

ClassificationResult classify(const ScrewScene& scene, Stage stage, const ClassifyOptions& options) {
  const SceneRenderer renderer(scene);
  ClassificationResult out;
  out.stage = stage;
  for (const auto& combo : enumerate_combinations(scene.screw_count())) {
    CombinationOutcome o;
    o.combination = combo;
    auto t0 = Clock::now();
    try {
      auto init = initialize_combination(renderer, combo, options.axial_step_deg);
      o.init = init.screws;
      o.pre = init.scores;
      out.pre_seconds += seconds_since(t0);
      t0 = Clock::now();
      if (stage == Stage::Post) {
        RegistrationProblem problem(renderer, init.poses());
        auto reg = register_poses(problem, options.registration);
        out.post_seconds += seconds_since(t0);
        o.post = StageScores{reg.dice_ap, reg.dice_lat, reg.loss};
        out.optimizer_generations += reg.generations_run;
        o.registration = std::move(reg);
      }
    } catch (const Error& e) {
      o.failed = true;
      o.error = e.what();
      o.pre = StageScores{0.0, 0.0, {}};
      if (stage == Stage::Post) o.post = StageScores{0.0, 0.0, {}};
    }
    out.outcomes.push_back(std::move(o));
  }

  const auto pick = [&](Stage at) {
    std::vector<double> dice, loss;
    std::vector<int> labels;
    for (const auto& o : out.outcomes) {
      const auto& s = at == Stage::Post ? *o.post : o.pre;
      dice.push_back(s.dice_ap + s.dice_lat);
      loss.push_back(s.loss.mean_loss);
      labels.push_back(o.combination.label);
    }
    return out.outcomes[select_best(dice, loss, labels)].combination;
  };
  out.predicted_pre = pick(Stage::Pre);
  if (stage == Stage::Post) out.predicted_post = pick(Stage::Post);
  out.predicted = stage == Stage::Post ? *out.predicted_post : out.predicted_pre;
  return out;
}

}  // namespace screwreg
