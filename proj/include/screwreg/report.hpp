#pragma once

#include "screwreg/config.hpp"
#include "screwreg/correspondence.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace screwreg {

/// One row of the Dice / AP loss / LAT loss / mean loss table.
struct StageRow {
  double dice_ap = 0.0;
  double dice_lat = 0.0;
  double dice = 0.0;  // two-view mean
  double ap_loss = 0.0;
  double lat_loss = 0.0;
  double mean_loss = 0.0;

  static StageRow from(const StageScores& s);
  friend bool operator==(const StageRow&, const StageRow&) = default;
};

struct ScrewRow {
  int ap_index = 0;
  int lat_index = 0;
  Point3 tip_world = Point3::Zero();
  Point3 center_world = Point3::Zero();
  double tip_residual = 0.0;
  double center_residual = 0.0;
  double axial_deg = 0.0;
  RigidPose initial_pose;
  std::optional<RigidPose> pose;  // after registration
  std::optional<double> tip_error_mm;  // against ground truth when known
  std::optional<double> axis_error_deg;

  friend bool operator==(const ScrewRow&, const ScrewRow&) = default;
};

struct CombinationRow {
  int label = 1;
  std::vector<int> mapping;
  bool failed = false;
  std::string error;
  StageRow pre;
  std::optional<StageRow> post;
  std::vector<ScrewRow> screws;
  std::vector<double> theta;    // optimizer offsets, 6 per screw
  std::vector<double> history;  // best mean loss per generation
  int generations_run = 0;
  std::uint64_t evaluations = 0;

  friend bool operator==(const CombinationRow&, const CombinationRow&) = default;
};

struct RunReport {
  std::string command;  // "classify" or "register"
  std::optional<Stage> stage;
  std::optional<int> predicted_pre;
  std::optional<int> predicted_post;
  std::optional<int> true_label;
  std::vector<CombinationRow> combinations;
  std::map<std::string, double> timing_s;  // wall clock per stage
  Json config;  // options echo

  const CombinationRow& combination(int label) const;

  /// Timing is excluded: two runs with the same inputs compare equal.
  friend bool operator==(const RunReport& a, const RunReport& b);
};

/// Throws InconsistentReport unless every row satisfies mean = (AP + LAT) / 2
/// to 1e-12.
void check_report_consistency(const RunReport& report);

/// Both directions re-check consistency. Doubles round-trip exactly.
Json report_to_json(const RunReport& report);
RunReport report_from_json(const Json& j);

}  // namespace screwreg
