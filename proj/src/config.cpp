#include "screwreg/config.hpp"

#include "screwreg/error.hpp"
#include "screwreg/image.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace screwreg {

namespace fs = std::filesystem;

namespace {

const char* kViewKeys[2] = {"AP", "LAT"};

bool is_number_array(const Json& j, std::size_t n) {
  if (!j.is_array() || j.size() != n) return false;
  for (const auto& v : j)
    if (!v.is_number() || !std::isfinite(v.get<double>())) return false;
  return true;
}

Point2 point2(const Json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }
Point3 point3(const Json& j) { return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()}; }
Json to_json(const Point2& p) { return Json::array({p.x(), p.y()}); }
Json to_json(const Point3& p) { return Json::array({p.x(), p.y(), p.z()}); }

[[noreturn]] void config_error(const std::string& what) { fail(ErrorCode::InvalidConfig, what); }

template <class T>
T get_or(const Json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

void check_version(const Json& j, const std::string& what) {
  if (!j.is_object()) config_error(what + ": expected an object");
  if (!j.contains("format_version")) config_error(what + ".format_version: missing");
  if (!j["format_version"].is_number_integer() || j["format_version"].get<int>() != kFormatVersion) {
    config_error(what + ".format_version: unsupported (expected " + std::to_string(kFormatVersion) + ")");
  }
}

void only_keys(const Json& j, const std::string& what, std::initializer_list<const char*> keys) {
  if (!j.is_object()) config_error(what + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    if (std::find_if(keys.begin(), keys.end(), [&](const char* k) { return key == k; }) == keys.end()) {
      config_error(what + "." + key + ": unknown key");
    }
  }
}

}  // namespace

fs::path SceneConfig::resolve(const fs::path& p) const { return p.is_absolute() ? p : base_dir / p; }

std::vector<std::string> validate_landmarks_json(const Json& j) {
  std::vector<std::string> errors;
  if (!j.is_object()) return {"landmarks: expected an object"};
  if (!j.contains("format_version")) {
    errors.push_back("landmarks.format_version: missing");
  } else if (!j["format_version"].is_number_integer() || j["format_version"].get<int>() != kFormatVersion) {
    errors.push_back("landmarks.format_version: unsupported");
  }
  std::array<std::size_t, 2> counts{};
  for (int v = 0; v < 2; ++v) {
    const std::string base = std::string("landmarks.") + kViewKeys[v];
    if (!j.contains(kViewKeys[v])) {
      errors.push_back(base + ": missing");
      continue;
    }
    const auto& list = j[kViewKeys[v]];
    if (!list.is_array()) {
      errors.push_back(base + ": expected an array");
      continue;
    }
    counts[v] = list.size();
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string at = base + "[" + std::to_string(i) + "]";
      if (!list[i].is_object()) {
        errors.push_back(at + ": expected an object");
        continue;
      }
      for (const char* key : {"tip", "center"}) {
        if (!list[i].contains(key)) errors.push_back(at + "." + key + ": missing");
        else if (!is_number_array(list[i][key], 2)) errors.push_back(at + "." + key + ": expected [u, v] finite numbers");
      }
    }
  }
  if (errors.empty() && counts[0] != counts[1]) {
    errors.push_back("landmarks: AP lists " + std::to_string(counts[0]) + " screws but LAT lists " +
                     std::to_string(counts[1]));
  }
  if (errors.empty() && counts[0] == 0) errors.push_back("landmarks: no screws");
  return errors;
}

LandmarkSet landmarks_from_json(const Json& j) {
  const auto errors = validate_landmarks_json(j);
  if (!errors.empty()) {
    std::string msg;
    for (const auto& e : errors) msg += (msg.empty() ? "" : "; ") + e;
    config_error(msg);
  }
  LandmarkSet set;
  for (int v = 0; v < 2; ++v) {
    for (const auto& s : j[kViewKeys[v]]) set.views[v].push_back({point2(s["tip"]), point2(s["center"])});
  }
  return set;
}

Json landmarks_to_json(const LandmarkSet& set) {
  Json j;
  j["format_version"] = kFormatVersion;
  for (int v = 0; v < 2; ++v) {
    Json list = Json::array();
    for (const auto& s : set.views[v]) list.push_back({{"tip", to_json(s.tip)}, {"center", to_json(s.center)}});
    j[kViewKeys[v]] = list;
  }
  return j;
}

SceneConfig scene_config_from_json(const Json& j, const fs::path& base_dir) {
  check_version(j, "scene");
  SceneConfig cfg;
  cfg.base_dir = base_dir;
  if (!j.contains("views") || !j["views"].is_object()) config_error("scene.views: missing");
  for (int v = 0; v < 2; ++v) {
    const std::string at = std::string("scene.views.") + kViewKeys[v];
    if (!j["views"].contains(kViewKeys[v])) config_error(at + ": missing");
    const auto& jv = j["views"][kViewKeys[v]];
    for (const char* key : {"image", "foreground", "background"}) {
      if (!jv.contains(key) || !jv[key].is_string()) config_error(at + "." + key + ": expected a path");
    }
    if (!jv.contains("projection") || !is_number_array(jv["projection"], 12)) {
      config_error(at + ".projection: expected 12 finite numbers (row-major 3x4)");
    }
    auto& f = cfg.views[v];
    f.image = jv["image"].get<std::string>();
    f.foreground = jv["foreground"].get<std::string>();
    f.background = jv["background"].get<std::string>();
    for (int k = 0; k < 12; ++k) f.projection(k / 4, k % 4) = jv["projection"][k].get<double>();
  }
  if (!j.contains("model") || !j["model"].is_object()) config_error("scene.model: missing");
  const auto& m = j["model"];
  if (!m.contains("mesh") || !m["mesh"].is_string()) config_error("scene.model.mesh: expected a path");
  if (!m.contains("canonical_tip") || !is_number_array(m["canonical_tip"], 3)) config_error("scene.model.canonical_tip: expected [x, y, z]");
  if (!m.contains("canonical_center") || !is_number_array(m["canonical_center"], 3)) {
    config_error("scene.model.canonical_center: expected [x, y, z]");
  }
  cfg.mesh = m["mesh"].get<std::string>();
  cfg.canonical_tip = point3(m["canonical_tip"]);
  cfg.canonical_center = point3(m["canonical_center"]);
  if (!j.contains("landmarks")) config_error("scene.landmarks: missing");
  cfg.landmarks = landmarks_from_json(j["landmarks"]);
  if (j.contains("ground_truth") && j["ground_truth"].is_string()) cfg.ground_truth = fs::path(j["ground_truth"].get<std::string>());
  return cfg;
}

Json scene_config_to_json(const SceneConfig& cfg) {
  Json j;
  j["format_version"] = kFormatVersion;
  Json views;
  for (int v = 0; v < 2; ++v) {
    const auto& f = cfg.views[v];
    Json proj = Json::array();
    for (int k = 0; k < 12; ++k) proj.push_back(f.projection(k / 4, k % 4));
    views[kViewKeys[v]] = {{"image", f.image.generic_string()},
                           {"foreground", f.foreground.generic_string()},
                           {"background", f.background.generic_string()},
                           {"projection", proj}};
  }
  j["views"] = views;
  j["model"] = {{"mesh", cfg.mesh.generic_string()},
                {"canonical_tip", to_json(cfg.canonical_tip)},
                {"canonical_center", to_json(cfg.canonical_center)}};
  j["landmarks"] = landmarks_to_json(cfg.landmarks);
  if (cfg.ground_truth) j["ground_truth"] = cfg.ground_truth->generic_string();
  return j;
}

Json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::ParseError, "cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
}

SceneConfig load_scene_config(const fs::path& path) {
  return scene_config_from_json(read_json_file(path), path.parent_path());
}

ScrewScene load_scene(const SceneConfig& cfg) {
  ScrewScene scene;
  TriMesh mesh = load_mesh(cfg.resolve(cfg.mesh));
  scene.model = std::make_shared<const ScrewModel>(std::move(mesh), cfg.canonical_tip, cfg.canonical_center);
  for (int v = 0; v < 2; ++v) {
    const auto& f = cfg.views[v];
    auto& d = scene.views[v];
    d.image = read_pgm_gray(cfg.resolve(f.image));
    d.foreground = read_pgm_mask(cfg.resolve(f.foreground));
    d.background = read_pgm_mask(cfg.resolve(f.background));
    d.projection = ProjectionMatrix(f.projection, static_cast<View>(v));
    d.landmarks = cfg.landmarks.views[v];
  }
  scene.validate();
  return scene;
}

Json pose_to_json(const RigidPose& p) {
  return {{"rz", p.rz}, {"ry", p.ry}, {"rx", p.rx}, {"translation", to_json(p.translation)}};
}

RigidPose pose_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("translation") || !is_number_array(j["translation"], 3)) {
    config_error("pose: expected {rz, ry, rx, translation: [x, y, z]}");
  }
  return {get_or(j, "rz", 0.0), get_or(j, "ry", 0.0), get_or(j, "rx", 0.0), point3(j["translation"])};
}

GroundTruth ground_truth_from_json(const Json& j) {
  check_version(j, "ground_truth");
  GroundTruth gt;
  gt.combination.label = j.at("combination").at("label").get<int>();
  gt.combination.mapping = j.at("combination").at("mapping").get<std::vector<int>>();
  for (const auto& p : j.at("poses")) gt.poses.push_back(pose_from_json(p));
  return gt;
}

Json ground_truth_to_json(const GroundTruth& gt) {
  Json poses = Json::array();
  for (const auto& p : gt.poses) poses.push_back(pose_to_json(p));
  return {{"format_version", kFormatVersion},
          {"combination", {{"label", gt.combination.label}, {"mapping", gt.combination.mapping}}},
          {"poses", poses}};
}

GroundTruth load_ground_truth(const fs::path& path) { return ground_truth_from_json(read_json_file(path)); }

PhantomSpec phantom_spec_from_json(const Json& j) try {
  check_version(j, "phantom");
  only_keys(j, "phantom",
            {"format_version", "seed", "screws", "true_poses", "rig", "screw", "noise_sigma", "blur_radius",
             "landmark_noise_px", "shuffle_lat", "require_separation", "background_holes"});
  const auto seed = get_or<std::uint64_t>(j, "seed", 0);
  PhantomSpec spec;
  if (j.contains("true_poses")) {
    spec.seed = seed;
    for (const auto& p : j["true_poses"]) spec.true_poses.push_back(pose_from_json(p));
  } else {
    spec = random_spec(seed, get_or<std::size_t>(j, "screws", 2));
  }
  if (j.contains("rig")) {
    const auto& r = j["rig"];
    only_keys(r, "phantom.rig",
              {"width", "height", "source_to_detector_mm", "source_to_isocenter_mm", "separation_deg", "pixel_pitch_mm"});
    spec.rig.width = get_or(r, "width", spec.rig.width);
    spec.rig.height = get_or(r, "height", spec.rig.height);
    spec.rig.source_to_detector_mm = get_or(r, "source_to_detector_mm", spec.rig.source_to_detector_mm);
    spec.rig.source_to_isocenter_mm = get_or(r, "source_to_isocenter_mm", spec.rig.source_to_isocenter_mm);
    spec.rig.separation_deg = get_or(r, "separation_deg", spec.rig.separation_deg);
    spec.rig.pixel_pitch_mm = get_or(r, "pixel_pitch_mm", spec.rig.pixel_pitch_mm);
  }
  if (j.contains("screw")) {
    const auto& s = j["screw"];
    only_keys(s, "phantom.screw", {"length_mm", "shaft_radius_mm", "head_radius_mm", "head_fraction", "segments"});
    spec.screw.length_mm = get_or(s, "length_mm", spec.screw.length_mm);
    spec.screw.shaft_radius_mm = get_or(s, "shaft_radius_mm", spec.screw.shaft_radius_mm);
    spec.screw.head_radius_mm = get_or(s, "head_radius_mm", spec.screw.head_radius_mm);
    spec.screw.head_fraction = get_or(s, "head_fraction", spec.screw.head_fraction);
    spec.screw.segments = get_or(s, "segments", spec.screw.segments);
  }
  spec.noise_sigma = get_or(j, "noise_sigma", spec.noise_sigma);
  spec.blur_radius = get_or(j, "blur_radius", spec.blur_radius);
  spec.landmark_noise_px = get_or(j, "landmark_noise_px", spec.landmark_noise_px);
  spec.shuffle_lat = get_or(j, "shuffle_lat", spec.shuffle_lat);
  spec.require_separation = get_or(j, "require_separation", spec.require_separation);
  if (j.contains("background_holes")) {
    for (const auto& r : j["background_holes"]) {
      spec.background_holes.push_back({r.at(0).get<int>(), r.at(1).get<int>(), r.at(2).get<int>(), r.at(3).get<int>()});
    }
  }
  spec.validate();
  return spec;
} catch (const nlohmann::json::exception& e) {
  config_error(std::string("phantom: ") + e.what());
}

Json phantom_spec_to_json(const PhantomSpec& spec) {
  Json poses = Json::array();
  for (const auto& p : spec.true_poses) poses.push_back(pose_to_json(p));
  Json holes = Json::array();
  for (const auto& r : spec.background_holes) holes.push_back({r.x0, r.y0, r.x1, r.y1});
  return {{"format_version", kFormatVersion},
          {"seed", spec.seed},
          {"rig",
           {{"width", spec.rig.width},
            {"height", spec.rig.height},
            {"source_to_detector_mm", spec.rig.source_to_detector_mm},
            {"source_to_isocenter_mm", spec.rig.source_to_isocenter_mm},
            {"separation_deg", spec.rig.separation_deg},
            {"pixel_pitch_mm", spec.rig.pixel_pitch_mm}}},
          {"screw",
           {{"length_mm", spec.screw.length_mm},
            {"shaft_radius_mm", spec.screw.shaft_radius_mm},
            {"head_radius_mm", spec.screw.head_radius_mm},
            {"head_fraction", spec.screw.head_fraction},
            {"segments", spec.screw.segments}}},
          {"true_poses", poses},
          {"noise_sigma", spec.noise_sigma},
          {"blur_radius", spec.blur_radius},
          {"landmark_noise_px", spec.landmark_noise_px},
          {"shuffle_lat", spec.shuffle_lat},
          {"require_separation", spec.require_separation},
          {"background_holes", holes}};
}

void write_text_atomic(const fs::path& path, const std::string& text) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) fail(ErrorCode::IoError, "cannot write " + tmp.string());
    out << text;
    if (!out) fail(ErrorCode::IoError, "write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

void write_scene_directory(const PhantomScene& phantom, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorCode::IoError, "cannot create " + dir.string() + ": " + ec.message());

  const auto& scene = phantom.scene;
  SceneConfig cfg;
  cfg.base_dir = dir;
  for (int v = 0; v < 2; ++v) {
    const std::string stem = v == 0 ? "ap" : "lat";
    const auto& d = scene.views[v];
    auto& f = cfg.views[v];
    f.image = stem + ".pgm";
    f.foreground = stem + "_fg.pgm";
    f.background = stem + "_bg.pgm";
    f.projection = d.projection.rows();
    write_pgm(dir / f.image, d.image);
    write_pgm(dir / f.foreground, d.foreground);
    write_pgm(dir / f.background, d.background);
    cfg.landmarks.views[v] = d.landmarks;
  }
  cfg.mesh = "screw.stl";
  write_stl_binary(dir / cfg.mesh, scene.model->mesh());
  cfg.canonical_tip = scene.model->canonical_tip();
  cfg.canonical_center = scene.model->canonical_center();
  cfg.ground_truth = "ground_truth.json";
  write_text_atomic(dir / "scene.json", scene_config_to_json(cfg).dump(2) + "\n");
  write_text_atomic(dir / "ground_truth.json",
                    ground_truth_to_json({phantom.true_combination, phantom.true_poses}).dump(2) + "\n");
}

}  // namespace screwreg
