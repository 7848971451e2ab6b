#pragma once

#include "screwreg/pipeline.hpp"

#include <condition_variable>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace screwreg {

enum class JobStatus { Queued, Running, Done, Failed };
std::string_view to_string(JobStatus status);

struct JobRequest {
  std::string command;  // "classify" or "register"
  Stage stage = Stage::Pre;
  int combination = 0;  // register only
  ClassifyOptions options;
};

/// Parses a POST /api/jobs body. Throws InvalidConfig / InvalidArgument.
JobRequest job_request_from_json(const Json& j, std::size_t combinations, const ClassifyOptions& defaults);

struct JobRecord {
  int id = 0;
  JobRequest request;
  JobStatus status = JobStatus::Queued;
  std::string error;
  std::optional<RunReport> report;
  std::map<std::string, std::string> overlays;  // file name -> PGM bytes
};

/// One scene's state: landmark payload, accepted combination, and a job queue
/// drained by a single worker thread.
class SceneService {
 public:
  SceneService(const std::filesystem::path& scene_path, ClassifyOptions defaults = {});
  ~SceneService();
  SceneService(const SceneService&) = delete;
  SceneService& operator=(const SceneService&) = delete;

  Json scene_json() const;
  /// Bytes of a scene file by view ("ap"/"lat") and kind ("image"/"foreground"/"background").
  std::string image_bytes(View view, const std::string& kind) const;

  std::string landmarks() const;
  /// Returns field-level messages; empty means the payload was stored verbatim.
  std::vector<std::string> put_landmarks(const std::string& body);

  std::optional<int> accepted() const;
  void set_accepted(std::optional<int> label);

  std::size_t combination_count() const;
  const ClassifyOptions& defaults() const { return defaults_; }
  int submit(JobRequest request);
  std::optional<JobRecord> job(int id) const;
  /// Blocks until the job leaves the queue or running state.
  JobRecord wait(int id) const;

 private:
  void worker_loop();
  SceneConfig snapshot_config() const;
  std::size_t combinations_unlocked() const;

  SceneConfig config_;
  ClassifyOptions defaults_;
  std::string landmark_payload_;
  std::optional<int> accepted_;

  mutable std::mutex mutex_;
  mutable std::condition_variable changed_;
  std::map<int, JobRecord> jobs_;
  std::deque<int> queue_;
  int next_id_ = 1;
  bool stopping_ = false;
  std::jthread worker_;
};

/// HTTP front end over a SceneService.
class HttpServer {
 public:
  HttpServer(SceneService& service, std::filesystem::path ui_dir = {});
  ~HttpServer();

  /// Throws IoError when the port cannot be bound. Port 0 picks a free port.
  int bind(const std::string& host, int port);
  /// Serves until stop() is called.
  void run();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace screwreg
