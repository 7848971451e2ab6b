#include "screwreg/server.hpp"

#include "screwreg/error.hpp"

#include "httplib.h"

#include <fstream>
#include <sstream>

namespace screwreg {

namespace fs = std::filesystem;

namespace {

const char* kPlaceholderPage = R"(<!doctype html>
<html><head><meta charset="utf-8"><title>screwreg</title></head>
<body>
<h1>screwreg</h1>
<p>The annotation UI bundle is not installed. The JSON API is available under <code>/api</code>.</p>
</body></html>
)";

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Json error_body(const std::string& code, const std::vector<std::string>& messages) {
  return {{"error", code}, {"messages", messages}};
}

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::IoError: return 500;
    default: return 400;
  }
}

}  // namespace

std::string_view to_string(JobStatus status) {
  switch (status) {
    case JobStatus::Queued: return "queued";
    case JobStatus::Running: return "running";
    case JobStatus::Done: return "done";
    case JobStatus::Failed: return "failed";
  }
  return "unknown";
}

JobRequest job_request_from_json(const Json& j, std::size_t combinations, const ClassifyOptions& defaults) {
  if (!j.is_object()) fail(ErrorCode::InvalidConfig, "job: expected an object");
  JobRequest r;
  if (!j.contains("command") || !j["command"].is_string()) fail(ErrorCode::InvalidConfig, "job.command: missing");
  r.command = j["command"].get<std::string>();
  if (r.command != "classify" && r.command != "register") {
    fail(ErrorCode::InvalidConfig, "job.command: must be 'classify' or 'register'");
  }
  if (j.contains("stage")) {
    if (!j["stage"].is_string()) fail(ErrorCode::InvalidConfig, "job.stage: expected 'pre' or 'post'");
    r.stage = stage_from_string(j["stage"].get<std::string>());
  }
  if (r.command == "register") {
    if (!j.contains("combination") || !j["combination"].is_number_integer()) {
      fail(ErrorCode::InvalidConfig, "job.combination: expected an integer label");
    }
    r.combination = j["combination"].get<int>();
    if (r.combination < 1 || r.combination > static_cast<int>(combinations)) {
      fail(ErrorCode::InvalidArgument, "job.combination: label " + std::to_string(r.combination) +
                                           " out of range 1.." + std::to_string(combinations));
    }
  }
  r.options = j.contains("options") ? options_from_json(j["options"], defaults) : defaults;
  return r;
}

SceneService::SceneService(const fs::path& scene_path, ClassifyOptions defaults)
    : config_(load_scene_config(scene_config_path(scene_path))), defaults_(std::move(defaults)) {
  validate_options(defaults_);
  // Fail early on unreadable inputs rather than inside the first job.
  load_scene_files(config_);
  landmark_payload_ = landmarks_to_json(config_.landmarks).dump(2) + "\n";
  worker_ = std::jthread([this] { worker_loop(); });
}

SceneService::~SceneService() {
  {
    std::lock_guard lock(mutex_);
    stopping_ = true;
  }
  changed_.notify_all();
}

Json SceneService::scene_json() const {
  std::lock_guard lock(mutex_);
  Json j = scene_config_to_json(config_);
  j["landmarks"] = Json::parse(landmark_payload_);
  j["screws"] = config_.landmarks.views[0].size();
  j["combinations"] = combinations_unlocked();
  return j;
}

std::string SceneService::image_bytes(View view, const std::string& kind) const {
  const auto& f = config_.view(view);
  if (kind == "image") return read_file(config_.resolve(f.image));
  if (kind == "foreground") return read_file(config_.resolve(f.foreground));
  if (kind == "background") return read_file(config_.resolve(f.background));
  fail(ErrorCode::InvalidArgument, "unknown image kind '" + kind + "'");
}

std::string SceneService::landmarks() const {
  std::lock_guard lock(mutex_);
  return landmark_payload_;
}

std::vector<std::string> SceneService::put_landmarks(const std::string& body) {
  Json j;
  try {
    j = Json::parse(body);
  } catch (const nlohmann::json::exception& e) {
    return {std::string("landmarks: malformed JSON: ") + e.what()};
  }
  auto errors = validate_landmarks_json(j);
  if (!errors.empty()) return errors;
  auto set = landmarks_from_json(j);
  std::lock_guard lock(mutex_);
  config_.landmarks = std::move(set);
  landmark_payload_ = body;
  return {};
}

std::optional<int> SceneService::accepted() const {
  std::lock_guard lock(mutex_);
  return accepted_;
}

void SceneService::set_accepted(std::optional<int> label) {
  std::lock_guard lock(mutex_);
  if (label && (*label < 1 || *label > static_cast<int>(combinations_unlocked()))) {
    fail(ErrorCode::InvalidArgument, "accepted combination " + std::to_string(*label) + " does not exist");
  }
  accepted_ = label;
}

std::size_t SceneService::combination_count() const {
  std::lock_guard lock(mutex_);
  return combinations_unlocked();
}

std::size_t SceneService::combinations_unlocked() const {
  std::size_t n = 1;
  for (std::size_t k = 2; k <= config_.landmarks.views[0].size(); ++k) n *= k;
  return n;
}

SceneConfig SceneService::snapshot_config() const { return config_; }

int SceneService::submit(JobRequest request) {
  int id;
  {
    std::lock_guard lock(mutex_);
    id = next_id_++;
    JobRecord rec;
    rec.id = id;
    rec.request = std::move(request);
    jobs_.emplace(id, std::move(rec));
    queue_.push_back(id);
  }
  changed_.notify_all();
  return id;
}

std::optional<JobRecord> SceneService::job(int id) const {
  std::lock_guard lock(mutex_);
  auto it = jobs_.find(id);
  if (it == jobs_.end()) return std::nullopt;
  return it->second;
}

JobRecord SceneService::wait(int id) const {
  std::unique_lock lock(mutex_);
  auto it = jobs_.find(id);
  if (it == jobs_.end()) fail(ErrorCode::InvalidArgument, "no job " + std::to_string(id));
  changed_.wait(lock, [&] {
    return it->second.status == JobStatus::Done || it->second.status == JobStatus::Failed;
  });
  return it->second;
}

void SceneService::worker_loop() {
  for (;;) {
    int id;
    JobRequest request;
    SceneConfig config;
    {
      std::unique_lock lock(mutex_);
      changed_.wait(lock, [&] { return stopping_ || !queue_.empty(); });
      if (stopping_) return;
      id = queue_.front();
      queue_.pop_front();
      auto& rec = jobs_.at(id);
      rec.status = JobStatus::Running;
      request = rec.request;
      config = snapshot_config();
    }
    changed_.notify_all();

    JobStatus status = JobStatus::Done;
    std::string error;
    std::optional<RunReport> report;
    std::map<std::string, std::string> overlays;
    try {
      const auto loaded = load_scene_files(config);
      report = request.command == "register" ? run_register(loaded, request.combination, request.options)
                                             : run_classify(loaded, request.stage, request.options);
      for (const auto& o : make_overlays(loaded.scene, *report)) {
        std::ostringstream buf;
        write_pgm(buf, o.image);
        overlays[o.filename()] = buf.str();
      }
    } catch (const std::exception& e) {
      status = JobStatus::Failed;
      error = e.what();
      report.reset();
      overlays.clear();
    }
    {
      std::lock_guard lock(mutex_);
      auto& rec = jobs_.at(id);
      rec.status = status;
      rec.error = error;
      rec.report = std::move(report);
      rec.overlays = std::move(overlays);
    }
    changed_.notify_all();
  }
}

struct HttpServer::Impl {
  SceneService& service;
  httplib::Server http;
  fs::path ui_dir;

  explicit Impl(SceneService& s, fs::path ui) : service(s), ui_dir(std::move(ui)) {
    // No SO_REUSEPORT: a second server on the same port must fail to bind.
    http.set_socket_options([](socket_t sock) {
      int yes = 1;
      setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
    });
  }
};

namespace {

void send_json(httplib::Response& res, const Json& j, int status = 200) {
  res.status = status;
  res.set_content(j.dump(2) + "\n", "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& code, const std::vector<std::string>& msgs) {
  send_json(res, error_body(code, msgs), status);
}

void send_error(httplib::Response& res, const Error& e) {
  send_error(res, http_status(e.code()), std::string(to_string(e.code())), {e.what()});
}

std::optional<View> view_param(const std::string& name) {
  if (name == "ap") return View::AP;
  if (name == "lat") return View::LAT;
  return std::nullopt;
}

Json job_json(const JobRecord& rec) {
  Json j = {{"id", rec.id}, {"command", rec.request.command}, {"status", std::string(to_string(rec.status))}};
  if (rec.request.command == "classify") j["stage"] = std::string(to_string(rec.request.stage));
  else j["combination"] = rec.request.combination;
  if (!rec.error.empty()) j["error"] = rec.error;
  Json names = Json::array();
  for (const auto& [name, bytes] : rec.overlays) names.push_back(name);
  j["overlays"] = names;
  return j;
}

}  // namespace

HttpServer::HttpServer(SceneService& service, fs::path ui_dir)
    : impl_(std::make_unique<Impl>(service, std::move(ui_dir))) {
  auto& http = impl_->http;
  auto& svc = impl_->service;

  if (!impl_->ui_dir.empty() && fs::is_directory(impl_->ui_dir)) {
    http.set_mount_point("/", impl_->ui_dir.string());
  } else {
    http.Get("/", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(kPlaceholderPage, "text/html");
    });
  }

  http.Get("/api/scene", [&svc](const httplib::Request&, httplib::Response& res) { send_json(res, svc.scene_json()); });

  http.Get(R"(/api/images/(ap|lat)(?:/(image|foreground|background))?)",
           [&svc](const httplib::Request& req, httplib::Response& res) {
             const std::string kind = req.matches[2].matched ? req.matches[2].str() : "image";
             try {
               res.set_content(svc.image_bytes(*view_param(req.matches[1]), kind), "image/x-portable-graymap");
             } catch (const Error& e) {
               send_error(res, e);
             }
           });

  http.Get("/api/landmarks", [&svc](const httplib::Request&, httplib::Response& res) {
    res.set_content(svc.landmarks(), "application/json");
  });

  http.Put("/api/landmarks", [&svc](const httplib::Request& req, httplib::Response& res) {
    const auto errors = svc.put_landmarks(req.body);
    if (!errors.empty()) return send_error(res, 422, "InvalidConfig", errors);
    res.status = 204;
  });

  http.Get("/api/accepted", [&svc](const httplib::Request&, httplib::Response& res) {
    const auto a = svc.accepted();
    send_json(res, {{"label", a ? Json(*a) : Json(nullptr)}});
  });

  http.Put("/api/accepted", [&svc](const httplib::Request& req, httplib::Response& res) {
    try {
      const auto j = Json::parse(req.body);
      if (!j.is_object() || !j.contains("label")) fail(ErrorCode::InvalidConfig, "accepted.label: missing");
      if (j["label"].is_null()) svc.set_accepted(std::nullopt);
      else if (j["label"].is_number_integer()) svc.set_accepted(j["label"].get<int>());
      else fail(ErrorCode::InvalidConfig, "accepted.label: expected an integer or null");
      send_json(res, {{"label", j["label"]}});
    } catch (const nlohmann::json::exception& e) {
      send_error(res, 400, "ParseError", {e.what()});
    } catch (const Error& e) {
      send_error(res, e);
    }
  });

  http.Post("/api/jobs", [&svc](const httplib::Request& req, httplib::Response& res) {
    try {
      const auto j = Json::parse(req.body);
      auto request = job_request_from_json(j, svc.combination_count(), svc.defaults());
      const int id = svc.submit(std::move(request));
      send_json(res, job_json(*svc.job(id)), 202);
    } catch (const nlohmann::json::exception& e) {
      send_error(res, 400, "ParseError", {e.what()});
    } catch (const Error& e) {
      send_error(res, e);
    }
  });

  http.Get(R"(/api/jobs/(\d+))", [&svc](const httplib::Request& req, httplib::Response& res) {
    const auto rec = svc.job(std::stoi(req.matches[1]));
    if (!rec) return send_error(res, 404, "NotFound", {"no such job"});
    send_json(res, job_json(*rec));
  });

  http.Get(R"(/api/jobs/(\d+)/report)", [&svc](const httplib::Request& req, httplib::Response& res) {
    const auto rec = svc.job(std::stoi(req.matches[1]));
    if (!rec) return send_error(res, 404, "NotFound", {"no such job"});
    if (rec->status == JobStatus::Failed) return send_error(res, 409, "JobFailed", {rec->error});
    if (!rec->report) return send_error(res, 409, "NotReady", {"job is " + std::string(to_string(rec->status))});
    send_json(res, report_to_json(*rec->report));
  });

  http.Get(R"(/api/jobs/(\d+)/overlays/([A-Za-z0-9_.]+))", [&svc](const httplib::Request& req, httplib::Response& res) {
    const auto rec = svc.job(std::stoi(req.matches[1]));
    if (!rec) return send_error(res, 404, "NotFound", {"no such job"});
    auto it = rec->overlays.find(req.matches[2]);
    if (it == rec->overlays.end()) return send_error(res, 404, "NotFound", {"no such overlay"});
    res.set_content(it->second, "image/x-portable-graymap");
  });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = impl_->http.bind_to_any_port(host);
    if (bound < 0) fail(ErrorCode::IoError, "cannot bind " + host);
    return bound;
  }
  if (!impl_->http.bind_to_port(host, port)) {
    fail(ErrorCode::IoError, "cannot bind " + host + ":" + std::to_string(port) + " (port in use?)");
  }
  return port;
}

void HttpServer::run() { impl_->http.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_) impl_->http.stop();
}

}  // namespace screwreg
