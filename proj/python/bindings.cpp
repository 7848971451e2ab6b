#include "screwreg/correspondence.hpp"
#include "screwreg/differential_evolution.hpp"
#include "screwreg/error.hpp"
#include "screwreg/geometry.hpp"
#include "screwreg/pipeline.hpp"
#include "screwreg/render.hpp"
#include "screwreg/similarity.hpp"

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace screwreg;

namespace {

using RowMatrixXd = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using FaceArray = py::array_t<std::uint32_t, py::array::c_style | py::array::forcecast>;
using GrayArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

GrayImage to_image(const GrayArray& a) {
  if (a.ndim() != 2) throw py::value_error("expected a 2-D array");
  const auto h = static_cast<int>(a.shape(0)), w = static_cast<int>(a.shape(1));
  return GrayImage(w, h, std::vector<double>(a.data(), a.data() + a.size()));
}

template <class T>
py::array_t<T> to_array(const Image<T>& img) {
  py::array_t<T> out({img.height(), img.width()});
  std::copy(img.data().begin(), img.data().end(), out.mutable_data());
  return out;
}

BinaryMask to_mask(const GrayArray& a) {
  const GrayImage g = to_image(a);
  BinaryMask m(g.width(), g.height());
  for (std::size_t i = 0; i < g.size(); ++i) m.pixels()[i] = g.pixels()[i] != 0.0;
  return m;
}

TriMesh to_mesh(const RowMatrixXd& vertices, const FaceArray& faces) {
  if (vertices.cols() != 3) throw py::value_error("vertices must be N x 3");
  if (faces.ndim() != 2 || faces.shape(1) != 3) throw py::value_error("faces must be M x 3");
  std::vector<Point3> v;
  for (Eigen::Index i = 0; i < vertices.rows(); ++i) v.emplace_back(vertices(i, 0), vertices(i, 1), vertices(i, 2));
  std::vector<Face> f(static_cast<std::size_t>(faces.shape(0)));
  auto r = faces.unchecked<2>();
  for (py::ssize_t i = 0; i < faces.shape(0); ++i) f[i] = {r(i, 0), r(i, 1), r(i, 2)};
  return TriMesh(std::move(v), std::move(f));
}

}  // namespace

PYBIND11_MODULE(_screwreg, m) {
  m.doc() = "Pedicle screw correspondence and 2D/3D registration";

  static py::exception<Error> error(m, "Error", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error, e.what());
    }
  });

  py::enum_<View>(m, "View").value("AP", View::AP).value("LAT", View::LAT);

  py::class_<RigidPose>(m, "RigidPose")
      .def(py::init([](double rz, double ry, double rx, const Vec3& t) { return RigidPose{rz, ry, rx, t}; }),
           py::arg("rz") = 0.0, py::arg("ry") = 0.0, py::arg("rx") = 0.0, py::arg("translation") = Vec3::Zero())
      .def_readwrite("rz", &RigidPose::rz)
      .def_readwrite("ry", &RigidPose::ry)
      .def_readwrite("rx", &RigidPose::rx)
      .def_readwrite("translation", &RigidPose::translation)
      .def("rotation", &RigidPose::rotation)
      .def("matrix", [](const RigidPose& p, const Point3& pivot) { return Eigen::Matrix4d(p.transform(pivot).matrix()); },
           py::arg("pivot") = Point3::Zero())
      .def("__repr__", [](const RigidPose& p) {
        return "RigidPose(rz=" + std::to_string(p.rz) + ", ry=" + std::to_string(p.ry) + ", rx=" +
               std::to_string(p.rx) + ")";
      });

  m.def(
      "project_point", [](const Mat34& P, const Point3& X) { return project_point(ProjectionMatrix(P, View::AP), X); },
      py::arg("P"), py::arg("X"));

  m.def(
      "triangulate",
      [](const Mat34& P_ap, const Mat34& P_lat, const Point2& uv_ap, const Point2& uv_lat) {
        const auto t = triangulate(ProjectionMatrix(P_ap, View::AP), ProjectionMatrix(P_lat, View::LAT), uv_ap, uv_lat);
        return py::make_tuple(t.point, t.residual);
      },
      py::arg("P_ap"), py::arg("P_lat"), py::arg("uv_ap"), py::arg("uv_lat"),
      "Least-squares 3D point from one landmark per view; returns (point, residual).");

  m.def(
      "rasterize",
      [](const RowMatrixXd& vertices, const FaceArray& faces, const Mat34& P, int width, int height) {
        return to_array(rasterize(to_mesh(vertices, faces), ProjectionMatrix(P, View::AP), width, height));
      },
      py::arg("vertices"), py::arg("faces"), py::arg("P"), py::arg("width"), py::arg("height"));

  m.def(
      "gradients",
      [](const GrayArray& img) {
        const auto g = gradients(to_image(img));
        return py::make_tuple(to_array(GrayImage(g.width, g.height, g.gx)), to_array(GrayImage(g.width, g.height, g.gy)));
      },
      py::arg("image"));

  m.def("gcl", [](const GrayArray& a, const GrayArray& b) { return gcl(to_image(a), to_image(b)); }, py::arg("projection"),
        py::arg("real"));
  m.def("dice", [](const GrayArray& a, const GrayArray& b) { return dice(to_mask(a), to_mask(b)); }, py::arg("a"),
        py::arg("b"));

  m.def(
      "differential_evolution",
      [](const std::function<double(std::vector<double>)>& f, std::vector<double> lo, std::vector<double> hi,
         int population, double weight, double crossover, int generations, double tolerance, std::uint64_t seed) {
        DEConfig cfg;
        cfg.population_size = population;
        cfg.weight = weight;
        cfg.crossover = crossover;
        cfg.max_generations = generations;
        cfg.tolerance = tolerance;
        cfg.seed = seed;
        const auto r = differential_evolution(
            [&f](std::span<const double> x) { return f(std::vector<double>(x.begin(), x.end())); },
            Bounds{std::move(lo), std::move(hi)}, cfg);
        py::dict out;
        out["best"] = r.best;
        out["best_loss"] = r.best_loss;
        out["history"] = r.history;
        out["generations_run"] = r.generations_run;
        out["evaluations"] = r.evaluations;
        return out;
      },
      py::arg("f"), py::arg("lo"), py::arg("hi"), py::arg("population") = 60, py::arg("weight") = 0.5,
      py::arg("crossover") = 0.9, py::arg("generations") = 200, py::arg("tolerance") = 1e-4, py::arg("seed") = 0);

  m.def(
      "make_rig",
      [](int width, int height, double sdd, double sid, double separation_deg, double pitch) {
        const auto [ap, lat] = make_rig(RigSpec{width, height, sdd, sid, separation_deg, pitch});
        return py::make_tuple(ap.rows(), lat.rows());
      },
      py::arg("width") = 256, py::arg("height") = 256, py::arg("source_to_detector_mm") = 1000.0,
      py::arg("source_to_isocenter_mm") = 600.0, py::arg("separation_deg") = 90.0, py::arg("pixel_pitch_mm") = 0.8);

  m.def(
      "screw_mesh",
      [](double length, double shaft_radius, double head_radius, int segments) {
        const auto model = make_screw_mesh(length, shaft_radius, head_radius, segments);
        RowMatrixXd v(model.mesh().vertices().size(), 3);
        for (std::size_t i = 0; i < model.mesh().vertices().size(); ++i) v.row(i) = model.mesh().vertices()[i];
        py::array_t<std::uint32_t> f({static_cast<py::ssize_t>(model.mesh().faces().size()), py::ssize_t{3}});
        auto w = f.mutable_unchecked<2>();
        for (std::size_t i = 0; i < model.mesh().faces().size(); ++i)
          for (int k = 0; k < 3; ++k) w(i, k) = model.mesh().faces()[i][k];
        return py::make_tuple(v, f);
      },
      py::arg("length") = 40.0, py::arg("shaft_radius") = 2.5, py::arg("head_radius") = 5.0, py::arg("segments") = 12);

  m.def(
      "synth",
      [](const std::filesystem::path& out, std::uint64_t seed, std::size_t screws, double landmark_noise_px) {
        auto spec = random_spec(seed, screws);
        spec.landmark_noise_px = landmark_noise_px;
        const auto phantom = render_scene(spec);
        write_scene_directory(phantom, out);
        return phantom.true_combination.label;
      },
      py::arg("out"), py::arg("seed") = 0, py::arg("screws") = 2, py::arg("landmark_noise_px") = 0.0,
      "Writes a random phantom scene directory; returns the true combination label.");

  m.def("triangulate_scene_json", [](const std::filesystem::path& scene) {
    return run_triangulate(load_scene_config(scene_config_path(scene))).dump();
  });

  m.def("classify_json", [](const std::filesystem::path& scene, const std::string& stage, const std::string& options) {
    const auto opts = options_from_json(Json::parse(options));
    py::gil_scoped_release release;
    return report_to_json(run_classify(load_scene_files(scene), stage_from_string(stage), opts)).dump();
  });

  m.def("register_json", [](const std::filesystem::path& scene, int label, const std::string& options) {
    const auto opts = options_from_json(Json::parse(options));
    py::gil_scoped_release release;
    return report_to_json(run_register(load_scene_files(scene), label, opts)).dump();
  });
}
