#include "screwreg/pipeline.hpp"

#include "screwreg/error.hpp"
#include "screwreg/geometry.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

namespace screwreg {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::vector<ScrewRow> screw_rows(const Combination& combo, const std::vector<ScrewInit>& init,
                                 const std::vector<RigidPose>* final_poses) {
  std::vector<ScrewRow> rows;
  for (std::size_t i = 0; i < init.size(); ++i) {
    ScrewRow r;
    r.ap_index = static_cast<int>(i);
    r.lat_index = combo.lat_of(i);
    r.tip_world = init[i].tip_world;
    r.center_world = init[i].center_world;
    r.tip_residual = init[i].tip_residual;
    r.center_residual = init[i].center_residual;
    r.axial_deg = init[i].axial_deg;
    r.initial_pose = init[i].pose;
    if (final_poses) r.pose = (*final_poses)[i];
    rows.push_back(r);
  }
  return rows;
}

void fill_registration(CombinationRow& row, const RegistrationResult& reg) {
  row.theta = reg.best_pose;
  row.history = reg.history;
  row.generations_run = reg.generations_run;
  row.evaluations = reg.evaluations;
}

void attach_truth(RunReport& report, const LoadedScene& loaded) {
  if (!loaded.truth) return;
  report.true_label = loaded.truth->combination.label;
  const auto& truth = loaded.truth->poses;
  for (auto& c : report.combinations) {
    for (auto& s : c.screws) {
      if (static_cast<std::size_t>(s.ap_index) >= truth.size()) continue;
      const auto e = pose_error(*loaded.scene.model, s.pose ? *s.pose : s.initial_pose, truth[s.ap_index]);
      s.tip_error_mm = e.tip_mm;
      s.axis_error_deg = e.axis_deg;
    }
  }
}

Json vec3(const Point3& p) { return Json::array({p.x(), p.y(), p.z()}); }

}  // namespace

fs::path scene_config_path(const fs::path& path) {
  return fs::is_directory(path) ? path / "scene.json" : path;
}

LoadedScene load_scene_files(const fs::path& path) { return load_scene_files(load_scene_config(scene_config_path(path))); }

LoadedScene load_scene_files(const SceneConfig& config) {
  LoadedScene out;
  out.config = config;
  out.scene = load_scene(config);
  if (config.ground_truth) out.truth = load_ground_truth(config.resolve(*config.ground_truth));
  return out;
}

Json options_json(const ClassifyOptions& o) {
  const auto& r = o.registration;
  return {{"axial_step_deg", o.axial_step_deg},
          {"population", r.de.population_size},
          {"generations", r.de.max_generations},
          {"f_weight", r.de.weight},
          {"cr", r.de.crossover},
          {"tolerance", r.de.tolerance},
          {"seed", r.de.seed},
          {"bounds_rot_deg", r.bounds_rot_deg},
          {"bounds_trans_mm", r.bounds_trans_mm},
          {"joint", r.joint}};
}

ClassifyOptions options_from_json(const Json& j, ClassifyOptions o) {
  if (!j.is_object()) fail(ErrorCode::InvalidConfig, "options: expected an object");
  auto& r = o.registration;
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "axial_step_deg") o.axial_step_deg = value.get<double>();
      else if (key == "population") r.de.population_size = value.get<int>();
      else if (key == "generations") r.de.max_generations = value.get<int>();
      else if (key == "f_weight") r.de.weight = value.get<double>();
      else if (key == "cr") r.de.crossover = value.get<double>();
      else if (key == "tolerance") r.de.tolerance = value.get<double>();
      else if (key == "seed") r.de.seed = value.get<std::uint64_t>();
      else if (key == "threads") r.de.threads = value.get<int>();
      else if (key == "bounds_rot_deg") r.bounds_rot_deg = value.get<double>();
      else if (key == "bounds_trans_mm") r.bounds_trans_mm = value.get<double>();
      else if (key == "joint") r.joint = value.get<bool>();
      else fail(ErrorCode::InvalidConfig, "options." + key + ": unknown option");
    } catch (const nlohmann::json::exception&) {
      fail(ErrorCode::InvalidConfig, "options." + key + ": wrong type");
    }
  }
  validate_options(o);
  return o;
}

void validate_options(const ClassifyOptions& o) {
  if (!(o.axial_step_deg > 0.0 && o.axial_step_deg <= 360.0)) {
    fail(ErrorCode::InvalidConfig, "axial step must be in (0, 360] degrees");
  }
  const auto& r = o.registration;
  if (!(r.bounds_rot_deg > 0.0 && std::isfinite(r.bounds_rot_deg)) ||
      !(r.bounds_trans_mm > 0.0 && std::isfinite(r.bounds_trans_mm))) {
    fail(ErrorCode::InvalidBounds, "rotation and translation bounds must be positive");
  }
  r.de.validate();
}

RunReport run_classify(const LoadedScene& loaded, Stage stage, const ClassifyOptions& options) {
  validate_options(options);
  const auto result = classify(loaded.scene, stage, options);
  RunReport report;
  report.command = "classify";
  report.stage = stage;
  report.predicted_pre = result.predicted_pre.label;
  if (result.predicted_post) report.predicted_post = result.predicted_post->label;
  for (const auto& o : result.outcomes) {
    CombinationRow row;
    row.label = o.combination.label;
    row.mapping = o.combination.mapping;
    row.failed = o.failed;
    row.error = o.error;
    row.pre = StageRow::from(o.pre);
    if (o.post) row.post = StageRow::from(*o.post);
    row.screws = screw_rows(o.combination, o.init, o.registration ? &o.registration->poses : nullptr);
    if (o.registration) fill_registration(row, *o.registration);
    report.combinations.push_back(std::move(row));
  }
  report.timing_s["pre"] = result.pre_seconds;
  if (stage == Stage::Post) report.timing_s["post"] = result.post_seconds;
  report.config = options_json(options);
  report.config["stage"] = std::string(to_string(stage));
  attach_truth(report, loaded);
  check_report_consistency(report);
  return report;
}

RunReport run_register(const LoadedScene& loaded, int label, const ClassifyOptions& options) {
  validate_options(options);
  const auto combos = enumerate_combinations(loaded.scene.screw_count());
  if (label < 1 || label > static_cast<int>(combos.size())) {
    fail(ErrorCode::InvalidArgument, "combination label " + std::to_string(label) + " out of range 1.." +
                                         std::to_string(combos.size()));
  }
  const auto& combo = combos[label - 1];
  const SceneRenderer renderer(loaded.scene);

  auto t0 = Clock::now();
  const auto init = initialize_combination(renderer, combo, options.axial_step_deg);
  const double pre_s = seconds_since(t0);
  t0 = Clock::now();
  RegistrationProblem problem(renderer, init.poses());
  const auto reg = register_poses(problem, options.registration);
  const double post_s = seconds_since(t0);

  RunReport report;
  report.command = "register";
  CombinationRow row;
  row.label = combo.label;
  row.mapping = combo.mapping;
  row.pre = StageRow::from(init.scores);
  row.post = StageRow::from(StageScores{reg.dice_ap, reg.dice_lat, reg.loss});
  row.screws = screw_rows(combo, init.screws, &reg.poses);
  fill_registration(row, reg);
  report.combinations.push_back(std::move(row));
  report.timing_s["pre"] = pre_s;
  report.timing_s["post"] = post_s;
  report.config = options_json(options);
  report.config["combination"] = label;
  attach_truth(report, loaded);
  check_report_consistency(report);
  return report;
}

Json run_triangulate(const SceneConfig& config) {
  std::array<ProjectionMatrix, 2> P{ProjectionMatrix(config.views[0].projection, View::AP),
                                    ProjectionMatrix(config.views[1].projection, View::LAT)};
  const auto& ap = config.landmarks.views[0];
  const auto& lat = config.landmarks.views[1];
  Json combos = Json::array();
  for (const auto& combo : enumerate_combinations(ap.size())) {
    Json screws = Json::array();
    for (std::size_t i = 0; i < ap.size(); ++i) {
      const int j = combo.lat_of(i);
      Json s = {{"ap_index", i}, {"lat_index", j}};
      try {
        const auto tip = triangulate(P[0], P[1], ap[i].tip, lat[j].tip);
        const auto center = triangulate(P[0], P[1], ap[i].center, lat[j].center);
        s["tip"] = vec3(tip.point);
        s["tip_residual"] = tip.residual;
        s["center"] = vec3(center.point);
        s["center_residual"] = center.residual;
      } catch (const Error& e) {
        s["error"] = e.what();
      }
      screws.push_back(s);
    }
    combos.push_back({{"label", combo.label}, {"mapping", combo.mapping}, {"screws", screws}});
  }
  return {{"format_version", kFormatVersion}, {"combinations", combos}};
}

std::string Overlay::filename() const {
  return "overlay_c" + std::to_string(label) + "_" + (view == View::AP ? "ap" : "lat") + ".pgm";
}

GrayImage composite_overlay(const GrayImage& real, const BinaryMask& mask) {
  if (!real.same_shape(mask)) fail(ErrorCode::DimensionMismatch, "overlay mask and image differ in size");
  GrayImage out = real;
  auto px = out.pixels();
  const auto m = mask.pixels();
  for (std::size_t i = 0; i < px.size(); ++i) {
    if (m[i]) px[i] = (1.0 - kOverlayOpacity) * px[i] + kOverlayOpacity * kOverlayValue;
  }
  return out;
}

std::vector<Overlay> make_overlays(const ScrewScene& scene, const RunReport& report) {
  const SceneRenderer renderer(scene);
  std::vector<Overlay> out;
  for (const auto& c : report.combinations) {
    std::vector<Eigen::Isometry3d> transforms;
    for (const auto& s : c.screws) transforms.push_back(model_transform(*scene.model, s.pose ? *s.pose : s.initial_pose));
    for (View v : {View::AP, View::LAT}) {
      BinaryMask mask = c.failed ? BinaryMask(scene.width(v), scene.height(v)) : renderer.render(v, transforms);
      out.push_back({c.label, v, composite_overlay(scene.view(v).image, mask)});
    }
  }
  return out;
}

void write_run_outputs(const fs::path& dir, const RunReport& report, const std::vector<Overlay>& overlays) {
  const std::string text = report_to_json(report).dump(2) + "\n";
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorCode::IoError, "cannot create " + dir.string() + ": " + ec.message());
  for (const auto& o : overlays) {
    std::ostringstream buf;
    write_pgm(buf, o.image);
    write_text_atomic(dir / o.filename(), buf.str());
  }
  write_text_atomic(dir / "report.json", text);
}

}  // namespace screwreg
