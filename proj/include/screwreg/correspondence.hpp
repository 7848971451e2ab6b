#pragma once

#include "screwreg/registration.hpp"

#include <optional>
#include <string>
#include <vector>

namespace screwreg {

/// All n! AP-to-LAT pairings in lexicographic order, labeled 1..n!.
std::vector<Combination> enumerate_combinations(std::size_t n);

struct ScrewInit {
  RigidPose pose;  // pivot = canonical tip
  Point3 tip_world = Point3::Zero();
  Point3 center_world = Point3::Zero();
  double tip_residual = 0.0;
  double center_residual = 0.0;
  double axial_deg = 0.0;
};

/// Scores of one combination at one stage.
struct StageScores {
  double dice_ap = 0.0;
  double dice_lat = 0.0;
  LossReport loss;

  double dice() const { return (dice_ap + dice_lat) / 2.0; }
};

struct CombinationInit {
  Combination combination;
  std::vector<ScrewInit> screws;
  StageScores scores;

  std::vector<RigidPose> poses() const;
};

inline constexpr double kDefaultAxialStepDeg = 10.0;

/// Triangulates each paired screw's tip and center, aligns the model, and
/// picks each screw's axial angle from {0, step, 2 step, ...} < 360 by the
/// two-view mean GCL with all screws rendered jointly (screws swept in order).
CombinationInit initialize_combination(const SceneRenderer& renderer, const Combination& combo,
                                       double axial_step_deg = kDefaultAxialStepDeg);

enum class Stage { Pre, Post };

std::string_view to_string(Stage stage);
Stage stage_from_string(std::string_view name);

struct ClassifyOptions {
  double axial_step_deg = kDefaultAxialStepDeg;
  RegistrationOptions registration;
};

struct CombinationOutcome {
  Combination combination;
  bool failed = false;
  std::string error;
  std::vector<ScrewInit> init;
  StageScores pre;
  std::optional<StageScores> post;
  std::optional<RegistrationResult> registration;
};

struct ClassificationResult {
  Stage stage = Stage::Pre;
  Combination predicted;  // at `stage`
  Combination predicted_pre;
  std::optional<Combination> predicted_post;
  std::vector<CombinationOutcome> outcomes;
  int optimizer_generations = 0;
  double pre_seconds = 0.0;  // wall clock spent initializing
  double post_seconds = 0.0;  // wall clock spent registering

  const CombinationOutcome& outcome(int label) const;
};

/// Picks the combination with the highest two-view Dice at `stage`; ties go to
/// lower mean loss, then lower label. A failing combination scores Dice 0.
ClassificationResult classify(const ScrewScene& scene, Stage stage, const ClassifyOptions& options = {});

/// Initialization followed by registration of one combination.
struct CombinationRegistration {
  CombinationInit init;
  RegistrationResult result;
};
CombinationRegistration register_combination(const SceneRenderer& renderer, const Combination& combo,
                                             const ClassifyOptions& options = {});

/// Applies the ranking rule to precomputed (dice, mean loss, label) triples.
std::size_t select_best(const std::vector<double>& dice, const std::vector<double>& mean_loss,
                        const std::vector<int>& labels);

}  // namespace screwreg
