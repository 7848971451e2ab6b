#include "doctest.h"
#include "support.hpp"

#include "screwreg/server.hpp"

#include "httplib.h"

#include <cstdlib>
#include <thread>

using namespace screwreg;

namespace {

struct Fixture {
  support::TempDir dir;
  std::unique_ptr<SceneService> service;
  std::unique_ptr<HttpServer> server;
  std::thread thread;
  int port = 0;

  explicit Fixture(std::uint64_t seed) {
    write_scene_directory(render_scene(random_spec(seed, 2)), dir / "scene");
    service = std::make_unique<SceneService>(dir / "scene");
    server = std::make_unique<HttpServer>(*service);
    port = server->bind("127.0.0.1", 0);
    thread = std::thread([this] { server->run(); });
  }
  ~Fixture() {
    server->stop();
    thread.join();
  }

  httplib::Client client() const {
    httplib::Client c("127.0.0.1", port);
    c.set_read_timeout(120, 0);
    return c;
  }

  // Polls until the job finishes.
  Json finish(int id) const {
    auto c = client();
    for (;;) {
      auto res = c.Get("/api/jobs/" + std::to_string(id));
      REQUIRE(res);
      const Json j = Json::parse(res->body);
      if (j["status"] == "done" || j["status"] == "failed") return j;
      std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }
  }
};

const char* kQuickOptions = R"({"population": 20, "generations": 8, "seed": 5})";

}  // namespace

TEST_CASE("scene and images") {
  Fixture f(101);
  auto c = f.client();
  auto scene = c.Get("/api/scene");
  REQUIRE(scene);
  CHECK(scene->status == 200);
  const Json j = Json::parse(scene->body);
  CHECK(j["format_version"] == kFormatVersion);
  CHECK(j["views"]["AP"]["projection"].size() == 12);

  auto img = c.Get("/api/images/lat");
  REQUIRE(img);
  CHECK(img->status == 200);
  CHECK(img->body == support::slurp(f.dir / "scene" / "lat.pgm"));
  auto fg = c.Get("/api/images/ap/foreground");
  REQUIRE(fg);
  CHECK(fg->body == support::slurp(f.dir / "scene" / "ap_fg.pgm"));
  auto missing = c.Get("/api/images/side");
  REQUIRE(missing);
  CHECK(missing->status == 404);
  auto root = c.Get("/");
  REQUIRE(root);
  CHECK(root->status == 200);
}

TEST_CASE("landmark PUT then GET is byte-identical") {
  Fixture f(102);
  auto c = f.client();
  auto initial = c.Get("/api/landmarks");
  REQUIRE(initial);
  CHECK(validate_landmarks_json(Json::parse(initial->body)).empty());

  // Unusual spacing and number spellings must survive untouched.
  const std::string body =
      "{\"format_version\":1,  \"AP\":[{\"tip\":[100.125,90.5],\"center\":[110.0,120.25]},"
      "{\"tip\":[60.5,70],\"center\":[65,95.75]}],\n\"LAT\":[{\"tip\":[1.5e2,80],\"center\":[140,110]},"
      "{\"tip\":[90,70],\"center\":[95,100]}]}";
  auto put = c.Put("/api/landmarks", body, "application/json");
  REQUIRE(put);
  CHECK(put->status == 204);
  auto got = c.Get("/api/landmarks");
  REQUIRE(got);
  CHECK(got->body == body);
}

TEST_CASE("malformed landmarks are rejected with field messages") {
  Fixture f(103);
  auto c = f.client();
  const std::string before = c.Get("/api/landmarks")->body;
  auto res = c.Put("/api/landmarks",
                   R"({"format_version": 1, "AP": [{"tip": [1, 2]}, {"tip": [1, 2], "center": [3, 4]}],
                       "LAT": [{"tip": [1, 2], "center": [3, 4]}, {"tip": [1, 2], "center": [3, "x"]}]})",
                   "application/json");
  REQUIRE(res);
  CHECK(res->status == 422);
  const Json err = Json::parse(res->body);
  CHECK(err["error"] == "InvalidConfig");
  const auto& msgs = err["messages"];
  CHECK(std::find(msgs.begin(), msgs.end(), "landmarks.AP[0].center: missing") != msgs.end());
  CHECK(std::find(msgs.begin(), msgs.end(), "landmarks.LAT[1].center: expected [u, v] finite numbers") != msgs.end());

  auto uneven = c.Put("/api/landmarks", R"({"format_version": 1, "AP": [{"tip": [1, 2], "center": [3, 4]}], "LAT": []})",
                      "application/json");
  REQUIRE(uneven);
  CHECK(uneven->status == 422);
  auto garbage = c.Put("/api/landmarks", "{nope", "application/json");
  REQUIRE(garbage);
  CHECK(garbage->status == 422);
  CHECK(c.Get("/api/landmarks")->body == before);
}

TEST_CASE("accepted combination persists") {
  Fixture f(104);
  auto c = f.client();
  CHECK(Json::parse(c.Get("/api/accepted")->body)["label"].is_null());
  auto put = c.Put("/api/accepted", R"({"label": 2})", "application/json");
  REQUIRE(put);
  CHECK(put->status == 200);
  CHECK(Json::parse(c.Get("/api/accepted")->body)["label"] == 2);
  CHECK(c.Put("/api/accepted", R"({"label": 7})", "application/json")->status == 400);
  CHECK(c.Put("/api/accepted", R"({"label": "one"})", "application/json")->status == 400);
  CHECK(Json::parse(c.Get("/api/accepted")->body)["label"] == 2);
}

TEST_CASE("job requests are validated") {
  Fixture f(105);
  auto c = f.client();
  auto bad_label = c.Post("/api/jobs", R"({"command": "register", "combination": 3})", "application/json");
  REQUIRE(bad_label);
  CHECK(bad_label->status == 400);
  CHECK(Json::parse(bad_label->body)["error"] == "InvalidArgument");
  CHECK(c.Post("/api/jobs", R"({"command": "register"})", "application/json")->status == 400);
  CHECK(c.Post("/api/jobs", R"({"command": "dance"})", "application/json")->status == 400);
  CHECK(c.Post("/api/jobs", R"({"command": "classify", "stage": "mid"})", "application/json")->status == 400);
  CHECK(c.Post("/api/jobs", R"({"command": "classify", "options": {"cr": 2}})", "application/json")->status == 400);
  CHECK(c.Post("/api/jobs", "not json", "application/json")->status == 400);
  CHECK(c.Get("/api/jobs/999")->status == 404);
}

TEST_CASE("classify over HTTP matches the direct pipeline and the CLI") {
  Fixture f(106);
  auto c = f.client();
  const std::string body = std::string(R"({"command": "classify", "stage": "post", "options": )") + kQuickOptions + "}";
  auto post = c.Post("/api/jobs", body, "application/json");
  REQUIRE(post);
  CHECK(post->status == 202);
  const int id = Json::parse(post->body)["id"].get<int>();
  const Json status = f.finish(id);
  REQUIRE(status["status"] == "done");
  CHECK(status["overlays"].size() == 4);

  auto rep = c.Get("/api/jobs/" + std::to_string(id) + "/report");
  REQUIRE(rep);
  REQUIRE(rep->status == 200);
  const RunReport served = report_from_json(Json::parse(rep->body));

  const ClassifyOptions opts = options_from_json(Json::parse(kQuickOptions));
  const RunReport direct = run_classify(load_scene_files(f.dir / "scene"), Stage::Post, opts);
  CHECK(served == direct);

  const std::string cmd = std::string(SCREWREG_CLI) + " classify '" + (f.dir / "scene").string() +
                          "' --stage post --population 20 --generations 8 --seed 5 -o '" + (f.dir / "cli").string() +
                          "' >/dev/null";
  REQUIRE(std::system(cmd.c_str()) == 0);
  CHECK(report_from_json(read_json_file(f.dir / "cli" / "report.json")) == served);

  auto overlay = c.Get("/api/jobs/" + std::to_string(id) + "/overlays/overlay_c1_lat.pgm");
  REQUIRE(overlay);
  CHECK(overlay->body == support::slurp(f.dir / "cli" / "overlay_c1_lat.pgm"));
  CHECK(c.Get("/api/jobs/" + std::to_string(id) + "/overlays/nothing.pgm")->status == 404);
}

TEST_CASE("jobs use the current landmarks and report failures") {
  Fixture f(107);
  auto c = f.client();
  Json lm = Json::parse(c.Get("/api/landmarks")->body);
  lm["AP"][0]["center"] = lm["AP"][0]["tip"];
  lm["LAT"][0]["center"] = lm["LAT"][0]["tip"];
  lm["LAT"][1]["center"] = lm["LAT"][1]["tip"];
  REQUIRE(c.Put("/api/landmarks", lm.dump(), "application/json")->status == 204);
  auto post = c.Post("/api/jobs", R"({"command": "register", "combination": 1})", "application/json");
  REQUIRE(post);
  const int id = Json::parse(post->body)["id"].get<int>();
  const Json status = f.finish(id);
  CHECK(status["status"] == "failed");
  CHECK(status["error"].get<std::string>().find("CoincidentLandmarks") != std::string::npos);
  auto rep = c.Get("/api/jobs/" + std::to_string(id) + "/report");
  REQUIRE(rep);
  CHECK(rep->status == 409);
}

TEST_CASE("jobs run one at a time in submission order") {
  support::TempDir dir;
  write_scene_directory(render_scene(random_spec(108, 2)), dir / "scene");
  SceneService svc(dir / "scene");
  JobRequest req;
  req.command = "classify";
  req.stage = Stage::Pre;
  const int a = svc.submit(req), b = svc.submit(req), cjob = svc.submit(req);
  CHECK(a < b);
  CHECK(b < cjob);
  const JobRecord last = svc.wait(cjob);
  CHECK(last.status == JobStatus::Done);
  CHECK(svc.job(a)->status == JobStatus::Done);
  CHECK(*svc.job(a)->report == *last.report);
}

TEST_CASE("binding a used port fails") {
  Fixture f(109);
  SceneService svc(f.dir / "scene");
  HttpServer second(svc);
  CHECK_THROWS_AS(second.bind("127.0.0.1", f.port), Error);
}
