#include "screwreg/error.hpp"
#include "screwreg/pipeline.hpp"
#include "screwreg/server.hpp"

#include "CLI11.hpp"

#include <csignal>
#include <cstdio>
#include <iostream>
#include <optional>

using namespace screwreg;
namespace fs = std::filesystem;

namespace {

struct OptimizerFlags {
  std::optional<fs::path> options_file;
  std::optional<std::uint64_t> seed;
  std::optional<int> population;
  std::optional<int> generations;
  std::optional<double> f_weight;
  std::optional<double> cr;
  std::optional<double> tolerance;
  std::optional<double> bounds_rot_deg;
  std::optional<double> bounds_trans_mm;
  std::optional<double> axial_step_deg;
  std::optional<int> threads;
  bool independent = false;

  void add_to(CLI::App& app) {
    app.add_option("--options", options_file, "JSON file with optimizer option keys")->check(CLI::ExistingFile);
    app.add_option("--seed", seed, "RNG seed");
    app.add_option("--population", population, "DE population size");
    app.add_option("--generations", generations, "DE generation limit");
    app.add_option("--f-weight", f_weight, "DE differential weight F");
    app.add_option("--cr", cr, "DE crossover probability");
    app.add_option("--tolerance", tolerance, "stop when worst - best loss falls below this");
    app.add_option("--bounds-rot-deg", bounds_rot_deg, "rotation offset bound per angle (deg)");
    app.add_option("--bounds-trans-mm", bounds_trans_mm, "translation offset bound per axis (mm)");
    app.add_option("--axial-step-deg", axial_step_deg, "axial sweep step for initialization (deg)");
    app.add_option("--threads", threads, "objective evaluation threads (results do not depend on it)");
    app.add_flag("--independent", independent, "register screws one at a time instead of jointly");
  }

  ClassifyOptions resolve() const {
    ClassifyOptions o;
    if (options_file) o = options_from_json(read_json_file(*options_file), o);
    auto& de = o.registration.de;
    if (seed) de.seed = *seed;
    if (population) de.population_size = *population;
    if (generations) de.max_generations = *generations;
    if (f_weight) de.weight = *f_weight;
    if (cr) de.crossover = *cr;
    if (tolerance) de.tolerance = *tolerance;
    if (threads) de.threads = *threads;
    if (bounds_rot_deg) o.registration.bounds_rot_deg = *bounds_rot_deg;
    if (bounds_trans_mm) o.registration.bounds_trans_mm = *bounds_trans_mm;
    if (axial_step_deg) o.axial_step_deg = *axial_step_deg;
    if (independent) o.registration.joint = false;
    validate_options(o);
    return o;
  }
};

void print_table(const RunReport& r) {
  std::printf("%-6s %-12s %8s %9s %9s %9s", "combo", "mapping", "pre_dice", "pre_ap", "pre_lat", "pre_mean");
  const bool post = !r.combinations.empty() && r.combinations.front().post.has_value();
  if (post) std::printf(" %9s %9s %9s %9s", "post_dice", "post_ap", "post_lat", "post_mean");
  std::printf("\n");
  for (const auto& c : r.combinations) {
    std::string mapping;
    for (int m : c.mapping) mapping += std::to_string(m + 1);
    std::printf("%-6d %-12s %8.4f %9.4f %9.4f %9.4f", c.label, mapping.c_str(), c.pre.dice, c.pre.ap_loss,
                c.pre.lat_loss, c.pre.mean_loss);
    if (c.post) {
      std::printf(" %9.4f %9.4f %9.4f %9.4f", c.post->dice, c.post->ap_loss, c.post->lat_loss, c.post->mean_loss);
    }
    if (c.failed) std::printf("  FAILED: %s", c.error.c_str());
    std::printf("\n");
  }
  if (r.predicted_pre) std::printf("predicted (pre): %d\n", *r.predicted_pre);
  if (r.predicted_post) std::printf("predicted (post): %d\n", *r.predicted_post);
  if (r.true_label) std::printf("ground truth: %d\n", *r.true_label);
}

HttpServer* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pedicle screw correspondence and 2D/3D registration"};
  app.require_subcommand(1);

  auto* synth = app.add_subcommand("synth", "Write a synthetic phantom scene directory");
  std::optional<fs::path> spec_file;
  fs::path synth_out;
  std::uint64_t synth_seed = 0;
  std::size_t synth_screws = 2;
  synth->add_option("--spec", spec_file, "phantom spec JSON (random scene when omitted)")->check(CLI::ExistingFile);
  synth->add_option("--out,-o", synth_out, "output directory")->required();
  synth->add_option("--seed", synth_seed, "scene seed when no spec is given");
  synth->add_option("--screws", synth_screws, "screw count when no spec is given")->check(CLI::Range(1, 4));

  auto* tri = app.add_subcommand("triangulate", "Triangulate landmark pairs for every combination");
  fs::path tri_scene;
  std::optional<fs::path> tri_out;
  tri->add_option("scene", tri_scene, "scene.json or its directory")->required();
  tri->add_option("--out,-o", tri_out, "also write the report to this file");

  auto* cls = app.add_subcommand("classify", "Score every combination and pick the correspondence");
  fs::path cls_scene;
  fs::path cls_out = "out";
  std::string stage_name = "pre";
  OptimizerFlags cls_flags;
  cls->add_option("scene", cls_scene, "scene.json or its directory")->required();
  cls->add_option("--out,-o", cls_out, "directory for report.json and overlays");
  cls->add_option("--stage", stage_name, "classify before or after registration")->check(CLI::IsMember({"pre", "post"}));
  cls_flags.add_to(*cls);

  auto* reg = app.add_subcommand("register", "Register one combination");
  fs::path reg_scene;
  fs::path reg_out = "out";
  int label = 1;
  OptimizerFlags reg_flags;
  reg->add_option("scene", reg_scene, "scene.json or its directory")->required();
  reg->add_option("--out,-o", reg_out, "directory for report.json and overlays");
  reg->add_option("--combination", label, "combination label (1-based)")->required();
  reg_flags.add_to(*reg);

  auto* serve = app.add_subcommand("serve", "Serve the annotation API for one scene");
  fs::path serve_scene;
  int port = 8080;
  std::string host = "127.0.0.1";
  fs::path ui_dir;
  OptimizerFlags serve_flags;
  serve->add_option("scene", serve_scene, "scene.json or its directory")->required();
  serve->add_option("--port", port, "listen port (0 picks a free one)")->check(CLI::Range(0, 65535));
  serve->add_option("--host", host, "listen address");
  serve->add_option("--ui-dir", ui_dir, "static UI bundle directory");
  serve_flags.add_to(*serve);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth) {
      const PhantomSpec spec =
          spec_file ? phantom_spec_from_json(read_json_file(*spec_file)) : random_spec(synth_seed, synth_screws);
      const auto phantom = render_scene(spec);
      write_scene_directory(phantom, synth_out);
      std::printf("wrote %s (%zu screws, true combination %d)\n", synth_out.string().c_str(),
                  phantom.true_poses.size(), phantom.true_combination.label);
    } else if (*tri) {
      const auto text = run_triangulate(load_scene_config(scene_config_path(tri_scene))).dump(2) + "\n";
      if (tri_out) write_text_atomic(*tri_out, text);
      std::cout << text;
    } else if (*cls) {
      const auto options = cls_flags.resolve();
      const auto loaded = load_scene_files(cls_scene);
      const auto report = run_classify(loaded, stage_from_string(stage_name), options);
      write_run_outputs(cls_out, report, make_overlays(loaded.scene, report));
      print_table(report);
    } else if (*reg) {
      const auto options = reg_flags.resolve();
      const auto loaded = load_scene_files(reg_scene);
      const auto report = run_register(loaded, label, options);
      write_run_outputs(reg_out, report, make_overlays(loaded.scene, report));
      print_table(report);
      const auto& c = report.combinations.front();
      std::printf("generations %d, evaluations %llu\n", c.generations_run,
                  static_cast<unsigned long long>(c.evaluations));
      for (const auto& s : c.screws) {
        if (s.tip_error_mm) {
          std::printf("screw %d: tip error %.3f mm, axis error %.3f deg\n", s.ap_index + 1, *s.tip_error_mm,
                      *s.axis_error_deg);
        }
      }
    } else if (*serve) {
      SceneService service(serve_scene, serve_flags.resolve());
      HttpServer server(service, ui_dir);
      const int bound = server.bind(host, port);
      std::printf("listening on http://%s:%d\n", host.c_str(), bound);
      std::fflush(stdout);
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      server.run();
      g_server = nullptr;
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
