#include "screwreg/report.hpp"

#include "screwreg/error.hpp"

#include <cmath>

namespace screwreg {

namespace {

constexpr double kMeanTolerance = 1e-12;

Json vec3(const Point3& p) { return Json::array({p.x(), p.y(), p.z()}); }
Point3 vec3(const Json& j) { return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()}; }

Json stage_json(const StageRow& s) {
  return {{"dice_ap", s.dice_ap}, {"dice_lat", s.dice_lat}, {"dice", s.dice},
          {"ap_loss", s.ap_loss}, {"lat_loss", s.lat_loss}, {"mean_loss", s.mean_loss}};
}

StageRow stage_row(const Json& j) {
  StageRow s;
  s.dice_ap = j.at("dice_ap").get<double>();
  s.dice_lat = j.at("dice_lat").get<double>();
  s.dice = j.at("dice").get<double>();
  s.ap_loss = j.at("ap_loss").get<double>();
  s.lat_loss = j.at("lat_loss").get<double>();
  s.mean_loss = j.at("mean_loss").get<double>();
  return s;
}

void check_row(const StageRow& s, int label, const char* stage) {
  const double expected = (s.ap_loss + s.lat_loss) / 2.0;
  if (!(std::abs(s.mean_loss - expected) <= kMeanTolerance)) {
    fail(ErrorCode::InconsistentReport, "combination " + std::to_string(label) + " " + stage +
                                            ": mean loss does not equal (AP + LAT) / 2");
  }
}

template <class T>
Json optional_json(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

template <class T>
std::optional<T> optional_from(const Json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return j[key].get<T>();
}

}  // namespace

StageRow StageRow::from(const StageScores& s) {
  return {s.dice_ap, s.dice_lat, s.dice(), s.loss.ap_loss, s.loss.lat_loss, s.loss.mean_loss};
}

const CombinationRow& RunReport::combination(int label) const {
  for (const auto& c : combinations)
    if (c.label == label) return c;
  fail(ErrorCode::InvalidArgument, "no combination " + std::to_string(label) + " in report");
}

bool operator==(const RunReport& a, const RunReport& b) {
  return a.command == b.command && a.stage == b.stage && a.predicted_pre == b.predicted_pre &&
         a.predicted_post == b.predicted_post && a.true_label == b.true_label && a.combinations == b.combinations &&
         a.config == b.config;
}

void check_report_consistency(const RunReport& report) {
  for (const auto& c : report.combinations) {
    check_row(c.pre, c.label, "pre");
    if (c.post) check_row(*c.post, c.label, "post");
  }
}

Json report_to_json(const RunReport& r) {
  check_report_consistency(r);
  Json j;
  j["format_version"] = kFormatVersion;
  j["command"] = r.command;
  j["stage"] = r.stage ? Json(std::string(to_string(*r.stage))) : Json(nullptr);
  j["predicted"] = {{"pre", optional_json(r.predicted_pre)}, {"post", optional_json(r.predicted_post)}};
  j["true_label"] = optional_json(r.true_label);
  Json rows = Json::array();
  for (const auto& c : r.combinations) {
    Json row;
    row["label"] = c.label;
    row["mapping"] = c.mapping;
    row["failed"] = c.failed;
    row["error"] = c.error;
    row["pre"] = stage_json(c.pre);
    row["post"] = c.post ? stage_json(*c.post) : Json(nullptr);
    Json screws = Json::array();
    for (const auto& s : c.screws) {
      screws.push_back({{"ap_index", s.ap_index},
                        {"lat_index", s.lat_index},
                        {"tip_world", vec3(s.tip_world)},
                        {"center_world", vec3(s.center_world)},
                        {"tip_residual", s.tip_residual},
                        {"center_residual", s.center_residual},
                        {"axial_deg", s.axial_deg},
                        {"initial_pose", pose_to_json(s.initial_pose)},
                        {"pose", s.pose ? pose_to_json(*s.pose) : Json(nullptr)},
                        {"tip_error_mm", optional_json(s.tip_error_mm)},
                        {"axis_error_deg", optional_json(s.axis_error_deg)}});
    }
    row["screws"] = screws;
    row["theta"] = c.theta;
    row["history"] = c.history;
    row["generations_run"] = c.generations_run;
    row["evaluations"] = c.evaluations;
    rows.push_back(row);
  }
  j["combinations"] = rows;
  j["timing_s"] = r.timing_s;
  j["config"] = r.config;
  return j;
}

RunReport report_from_json(const Json& j) {
  if (!j.is_object() || j.value("format_version", -1) != kFormatVersion) {
    fail(ErrorCode::ParseError, "report: missing or unsupported format_version");
  }
  RunReport r;
  try {
    r.command = j.at("command").get<std::string>();
    if (!j.at("stage").is_null()) r.stage = stage_from_string(j["stage"].get<std::string>());
    r.predicted_pre = optional_from<int>(j.at("predicted"), "pre");
    r.predicted_post = optional_from<int>(j.at("predicted"), "post");
    r.true_label = optional_from<int>(j, "true_label");
    for (const auto& row : j.at("combinations")) {
      CombinationRow c;
      c.label = row.at("label").get<int>();
      c.mapping = row.at("mapping").get<std::vector<int>>();
      c.failed = row.at("failed").get<bool>();
      c.error = row.at("error").get<std::string>();
      c.pre = stage_row(row.at("pre"));
      if (!row.at("post").is_null()) c.post = stage_row(row["post"]);
      for (const auto& s : row.at("screws")) {
        ScrewRow sr;
        sr.ap_index = s.at("ap_index").get<int>();
        sr.lat_index = s.at("lat_index").get<int>();
        sr.tip_world = vec3(s.at("tip_world"));
        sr.center_world = vec3(s.at("center_world"));
        sr.tip_residual = s.at("tip_residual").get<double>();
        sr.center_residual = s.at("center_residual").get<double>();
        sr.axial_deg = s.at("axial_deg").get<double>();
        sr.initial_pose = pose_from_json(s.at("initial_pose"));
        if (!s.at("pose").is_null()) sr.pose = pose_from_json(s["pose"]);
        sr.tip_error_mm = optional_from<double>(s, "tip_error_mm");
        sr.axis_error_deg = optional_from<double>(s, "axis_error_deg");
        c.screws.push_back(sr);
      }
      c.theta = row.at("theta").get<std::vector<double>>();
      c.history = row.at("history").get<std::vector<double>>();
      c.generations_run = row.at("generations_run").get<int>();
      c.evaluations = row.at("evaluations").get<std::uint64_t>();
      r.combinations.push_back(std::move(c));
    }
    r.timing_s = j.at("timing_s").get<std::map<std::string, double>>();
    r.config = j.at("config");
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ParseError, std::string("report: ") + e.what());
  }
  check_report_consistency(r);
  return r;
}

}  // namespace screwreg
