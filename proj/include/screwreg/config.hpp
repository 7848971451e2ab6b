#pragma once

#include "screwreg/phantom.hpp"
#include "screwreg/scene.hpp"

#include "json.hpp"

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace screwreg {

inline constexpr int kFormatVersion = 1;

/// Per-view landmark lists; AP and LAT orders are independent.
struct LandmarkSet {
  std::array<std::vector<ScrewLandmarks>, 2> views;

  std::vector<ScrewLandmarks>& view(View v) { return views[static_cast<int>(v)]; }
  const std::vector<ScrewLandmarks>& view(View v) const { return views[static_cast<int>(v)]; }
};

struct ViewFiles {
  std::filesystem::path image;
  std::filesystem::path foreground;
  std::filesystem::path background;
  Mat34 projection = Mat34::Zero();
};

struct GroundTruth {
  Combination combination;
  std::vector<RigidPose> poses;
};

/// Scene configuration file (scene.json). Relative paths resolve against base_dir.
struct SceneConfig {
  std::filesystem::path base_dir;
  std::array<ViewFiles, 2> views;
  std::filesystem::path mesh;
  Point3 canonical_tip = Point3::Zero();
  Point3 canonical_center = Point3::Zero();
  LandmarkSet landmarks;
  std::optional<std::filesystem::path> ground_truth;

  const ViewFiles& view(View v) const { return views[static_cast<int>(v)]; }
  std::filesystem::path resolve(const std::filesystem::path& p) const;
};

using Json = nlohmann::ordered_json;

/// Field-level validation; every problem is reported as "path: message".
std::vector<std::string> validate_landmarks_json(const Json& j);
/// Throws InvalidConfig carrying all field-level messages.
LandmarkSet landmarks_from_json(const Json& j);
Json landmarks_to_json(const LandmarkSet& set);

SceneConfig scene_config_from_json(const Json& j, const std::filesystem::path& base_dir);
Json scene_config_to_json(const SceneConfig& cfg);
SceneConfig load_scene_config(const std::filesystem::path& path);

/// Reads every referenced file. Throws ParseError on unreadable inputs.
ScrewScene load_scene(const SceneConfig& cfg);

GroundTruth ground_truth_from_json(const Json& j);
Json ground_truth_to_json(const GroundTruth& gt);
GroundTruth load_ground_truth(const std::filesystem::path& path);

Json pose_to_json(const RigidPose& p);
RigidPose pose_from_json(const Json& j);

PhantomSpec phantom_spec_from_json(const Json& j);
Json phantom_spec_to_json(const PhantomSpec& spec);

/// Writes images, masks, mesh, scene.json and ground_truth.json into `dir`.
/// Output bytes depend only on the scene contents.
void write_scene_directory(const PhantomScene& phantom, const std::filesystem::path& dir);

Json read_json_file(const std::filesystem::path& path);
/// Writes via a temporary file and rename so readers never see partial output.
void write_text_atomic(const std::filesystem::path& path, const std::string& text);

}  // namespace screwreg
