#pragma once

#include "screwreg/config.hpp"
#include "screwreg/report.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace screwreg {

/// Overlay compositing: silhouette pixels become
/// (1 - kOverlayOpacity) * real + kOverlayOpacity * kOverlayValue.
inline constexpr double kOverlayOpacity = 0.5;
inline constexpr double kOverlayValue = 1.0;

struct LoadedScene {
  SceneConfig config;
  ScrewScene scene;
  std::optional<GroundTruth> truth;
};

/// Accepts a scene.json path or a directory containing one.
std::filesystem::path scene_config_path(const std::filesystem::path& path);
LoadedScene load_scene_files(const std::filesystem::path& path);
/// Builds the scene from an in-memory config (files still read from disk).
LoadedScene load_scene_files(const SceneConfig& config);

/// Options echo stored in every report.
Json options_json(const ClassifyOptions& options);
/// Overrides `base` with any keys present in `j` (the names options_json emits,
/// plus "threads"). Throws InvalidConfig on unknown keys or wrong types.
ClassifyOptions options_from_json(const Json& j, ClassifyOptions base = {});
/// Throws InvalidConfig or InvalidBounds.
void validate_options(const ClassifyOptions& options);

RunReport run_classify(const LoadedScene& loaded, Stage stage, const ClassifyOptions& options);
/// Throws InvalidArgument when `label` does not name a combination.
RunReport run_register(const LoadedScene& loaded, int label, const ClassifyOptions& options);

/// Tip/center triangulation for every combination's pairings.
Json run_triangulate(const SceneConfig& config);

struct Overlay {
  int label = 1;
  View view = View::AP;
  GrayImage image;

  std::string filename() const;  // overlay_c<label>_<ap|lat>.pgm
};

GrayImage composite_overlay(const GrayImage& real, const BinaryMask& mask);
/// One overlay per combination and view, rendered from the report's final poses.
std::vector<Overlay> make_overlays(const ScrewScene& scene, const RunReport& report);

/// Overlays first, then report.json; each file is written atomically.
void write_run_outputs(const std::filesystem::path& dir, const RunReport& report, const std::vector<Overlay>& overlays);

}  // namespace screwreg
