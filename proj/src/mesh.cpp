#include "screwreg/mesh.hpp"

#include "screwreg/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>

namespace screwreg {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

}  // namespace

TriMesh::TriMesh(std::vector<Point3> vertices, std::vector<Face> faces)
    : vertices_(std::move(vertices)), faces_(std::move(faces)) {
  const auto n = vertices_.size();
  for (std::size_t f = 0; f < faces_.size(); ++f) {
    const auto& face = faces_[f];
    for (auto idx : face) {
      if (idx >= n) fail(ErrorCode::InvalidArgument, "face " + std::to_string(f) + " index out of range");
    }
    if (face[0] == face[1] || face[1] == face[2] || face[0] == face[2]) {
      fail(ErrorCode::InvalidArgument, "face " + std::to_string(f) + " repeats a vertex");
    }
  }
  for (const auto& v : vertices_) {
    if (!v.allFinite()) fail(ErrorCode::InvalidArgument, "non-finite mesh vertex");
  }
}

ScrewModel::ScrewModel(TriMesh mesh, Point3 canonical_tip, Point3 canonical_center)
    : mesh_(std::move(mesh)), tip_(canonical_tip), center_(canonical_center) {
  if (!((center_ - tip_).norm() > 1.0)) {
    fail(ErrorCode::InvalidArgument, "canonical tip and center must be more than 1 mm apart");
  }
}

double normalize_degrees(double angle) {
  double a = std::fmod(angle, 360.0);
  if (a <= -180.0) a += 360.0;
  if (a > 180.0) a -= 360.0;
  return a;
}

Eigen::Matrix3d euler_zyx_to_matrix(double rz_deg, double ry_deg, double rx_deg) {
  const Eigen::Matrix3d Rz = Eigen::AngleAxisd(rz_deg * kDeg, Vec3::UnitZ()).toRotationMatrix();
  const Eigen::Matrix3d Ry = Eigen::AngleAxisd(ry_deg * kDeg, Vec3::UnitY()).toRotationMatrix();
  const Eigen::Matrix3d Rx = Eigen::AngleAxisd(rx_deg * kDeg, Vec3::UnitX()).toRotationMatrix();
  return Rx * Ry * Rz;
}

Eigen::Vector3d matrix_to_euler_zyx(const Eigen::Matrix3d& R) {
  // R = Rx(a) Ry(b) Rz(c):  R(0,2) = sin b,  R(1,2) = -sin a cos b,  R(2,2) = cos a cos b,
  //                         R(0,1) = -cos b sin c,  R(0,0) = cos b cos c.
  const double sb = std::clamp(R(0, 2), -1.0, 1.0);
  const double b = std::asin(sb);
  double a = 0.0;
  double c = 0.0;
  if (std::abs(sb) < 1.0 - 1e-12) {
    a = std::atan2(-R(1, 2), R(2, 2));
    c = std::atan2(-R(0, 1), R(0, 0));
  } else {
    // Gimbal lock: only a +/- c is determined; put everything into a.
    a = std::atan2(R(2, 1), R(1, 1));
  }
  return {normalize_degrees(c / kDeg), normalize_degrees(b / kDeg), normalize_degrees(a / kDeg)};
}

Eigen::Matrix3d RigidPose::rotation() const { return euler_zyx_to_matrix(rz, ry, rx); }

RigidPose RigidPose::normalized() const {
  return {normalize_degrees(rz), normalize_degrees(ry), normalize_degrees(rx), translation};
}

Eigen::Isometry3d RigidPose::transform(const Point3& pivot) const {
  Eigen::Isometry3d T = Eigen::Isometry3d::Identity();
  const Eigen::Matrix3d R = rotation();
  T.linear() = R;
  T.translation() = pivot + translation - R * pivot;
  return T;
}

RigidPose pose_from(const Eigen::Matrix3d& R, const Vec3& translation) {
  const Eigen::Vector3d e = matrix_to_euler_zyx(R);
  return {e(0), e(1), e(2), translation};
}

RigidPose inverse(const RigidPose& pose) {
  const Eigen::Matrix3d Rt = pose.rotation().transpose();
  return pose_from(Rt, -(Rt * pose.translation));
}

RigidPose compose(const RigidPose& outer, const RigidPose& inner, const Point3& pivot) {
  const Eigen::Isometry3d T = outer.transform(pivot) * inner.transform(pivot);
  const Eigen::Matrix3d R = T.linear();
  // T(v) = R (v - pivot) + pivot + t  =>  t = T(pivot) - pivot
  return pose_from(R, T * pivot - pivot);
}

Point3 apply_pose(const Point3& v, const RigidPose& pose, const Point3& pivot) {
  return pose.rotation() * (v - pivot) + pivot + pose.translation;
}

TriMesh apply_pose(const TriMesh& mesh, const RigidPose& pose, const Point3& pivot) {
  const Eigen::Matrix3d R = pose.rotation();
  std::vector<Point3> out;
  out.reserve(mesh.vertex_count());
  for (const auto& v : mesh.vertices()) out.emplace_back(R * (v - pivot) + pivot + pose.translation);
  return TriMesh(std::move(out), mesh.faces());
}

Eigen::Matrix3d minimal_rotation(const Vec3& from, const Vec3& to) {
  const Vec3 a = from.normalized();
  const Vec3 b = to.normalized();
  const double d = std::clamp(a.dot(b), -1.0, 1.0);
  if (d < -1.0 + 1e-12) {
    // Cross with the coordinate axis least aligned with `a`.
    Eigen::Index k = 0;
    a.cwiseAbs().minCoeff(&k);
    const Vec3 axis = a.cross(Vec3::Unit(k)).normalized();
    return Eigen::AngleAxisd(std::numbers::pi, axis).toRotationMatrix();
  }
  const Vec3 c = a.cross(b);
  const double s = c.norm();
  if (s < 1e-15) return Eigen::Matrix3d::Identity();
  return Eigen::AngleAxisd(std::atan2(s, d), c / s).toRotationMatrix();
}

double axis_angle_deg(const Vec3& a, const Vec3& b) {
  const double s = a.cross(b).norm();
  const double c = a.dot(b);
  return std::atan2(s, c) / kDeg;
}

RigidPose align_to_landmarks(const ScrewModel& model, const Point3& tip_world, const Point3& center_world,
                             double axial_deg) {
  const Vec3 v = center_to_tip_vector(tip_world, center_world).normalized();
  const Eigen::Matrix3d align = minimal_rotation(model.canonical_axis(), v);
  const Eigen::Matrix3d spin = Eigen::AngleAxisd(axial_deg * kDeg, v).toRotationMatrix();
  return pose_from(spin * align, tip_world - model.canonical_tip());
}

// ---------------------------------------------------------------------------
// STL

namespace {

struct VertexKey {
  double x, y, z;
  auto operator<=>(const VertexKey&) const = default;
};

class MeshBuilder {
 public:
  void add_triangle(const std::array<Point3, 3>& tri) {
    Face f{};
    for (int i = 0; i < 3; ++i) {
      if (!tri[i].allFinite()) fail(ErrorCode::ParseError, "non-finite vertex coordinate");
      const VertexKey key{tri[i].x(), tri[i].y(), tri[i].z()};
      auto [it, inserted] = index_.try_emplace(key, static_cast<std::uint32_t>(vertices_.size()));
      if (inserted) vertices_.push_back(tri[i]);
      f[i] = it->second;
    }
    if (f[0] == f[1] || f[1] == f[2] || f[0] == f[2]) {
      fail(ErrorCode::ParseError, "degenerate triangle " + std::to_string(faces_.size()));
    }
    faces_.push_back(f);
  }

  TriMesh finish() {
    if (faces_.empty()) fail(ErrorCode::EmptyMesh, "mesh has no triangles");
    return TriMesh(std::move(vertices_), std::move(faces_));
  }

 private:
  std::map<VertexKey, std::uint32_t> index_;
  std::vector<Point3> vertices_;
  std::vector<Face> faces_;
};

TriMesh parse_binary(const std::string& bytes) {
  if (bytes.size() < 84) fail(ErrorCode::ParseError, "binary STL shorter than header");
  std::uint32_t count = 0;
  std::memcpy(&count, bytes.data() + 80, 4);
  if (bytes.size() != 84 + std::size_t{count} * 50) {
    fail(ErrorCode::ParseError, "binary STL size does not match triangle count");
  }
  MeshBuilder builder;
  const char* p = bytes.data() + 84;
  for (std::uint32_t t = 0; t < count; ++t, p += 50) {
    float f[12];
    std::memcpy(f, p, sizeof(f));
    builder.add_triangle({Point3(f[3], f[4], f[5]), Point3(f[6], f[7], f[8]), Point3(f[9], f[10], f[11])});
  }
  return builder.finish();
}

TriMesh parse_ascii(const std::string& text) {
  std::istringstream in(text);
  std::string token;
  in >> token;
  if (token != "solid") fail(ErrorCode::ParseError, "ASCII STL must start with 'solid'");
  std::getline(in, token);  // rest of the solid line is the name

  MeshBuilder builder;
  std::array<Point3, 3> tri;
  int n = 0;
  bool in_loop = false;
  bool ended = false;
  while (in >> token) {
    if (token == "vertex") {
      if (!in_loop || n >= 3) fail(ErrorCode::ParseError, "unexpected 'vertex'");
      double x, y, z;
      if (!(in >> x >> y >> z)) fail(ErrorCode::ParseError, "malformed vertex line");
      tri[n++] = Point3(x, y, z);
    } else if (token == "facet") {
      std::string normal;
      double nx, ny, nz;
      if (!(in >> normal >> nx >> ny >> nz) || normal != "normal") fail(ErrorCode::ParseError, "malformed facet line");
    } else if (token == "outer") {
      std::string loop;
      if (!(in >> loop) || loop != "loop") fail(ErrorCode::ParseError, "expected 'outer loop'");
      in_loop = true;
      n = 0;
    } else if (token == "endloop") {
      if (!in_loop || n != 3) fail(ErrorCode::ParseError, "loop without exactly three vertices");
      in_loop = false;
      builder.add_triangle(tri);
    } else if (token == "endfacet") {
      if (in_loop) fail(ErrorCode::ParseError, "endfacet inside loop");
    } else if (token == "endsolid") {
      ended = true;
      break;
    } else {
      fail(ErrorCode::ParseError, "unexpected token '" + token + "'");
    }
  }
  if (!ended) fail(ErrorCode::ParseError, "missing 'endsolid'");
  return builder.finish();
}

bool looks_binary(const std::string& bytes) {
  if (bytes.size() < 84) return false;
  std::uint32_t count = 0;
  std::memcpy(&count, bytes.data() + 80, 4);
  return bytes.size() == 84 + std::size_t{count} * 50;
}

}  // namespace

TriMesh load_mesh(std::istream& in, MeshFormat format) {
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) fail(ErrorCode::ParseError, "read failure");
  switch (format) {
    case MeshFormat::StlBinary: return parse_binary(bytes);
    case MeshFormat::StlAscii: return parse_ascii(bytes);
    case MeshFormat::Auto: break;
  }
  if (looks_binary(bytes)) return parse_binary(bytes);
  return parse_ascii(bytes);
}

TriMesh load_mesh(const std::filesystem::path& path, MeshFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::ParseError, "cannot open mesh file " + path.string());
  return load_mesh(in, format);
}

void write_stl_binary(std::ostream& out, const TriMesh& mesh, const std::string& header) {
  char head[80] = {};
  std::memcpy(head, header.data(), std::min<std::size_t>(header.size(), 80));
  out.write(head, 80);
  const auto count = static_cast<std::uint32_t>(mesh.face_count());
  out.write(reinterpret_cast<const char*>(&count), 4);
  for (const auto& f : mesh.faces()) {
    const auto& a = mesh.vertices()[f[0]];
    const auto& b = mesh.vertices()[f[1]];
    const auto& c = mesh.vertices()[f[2]];
    Vec3 n = (b - a).cross(c - a);
    if (n.norm() > 0) n.normalize();
    float buf[12];
    for (int i = 0; i < 3; ++i) {
      buf[i] = static_cast<float>(n(i));
      buf[3 + i] = static_cast<float>(a(i));
      buf[6 + i] = static_cast<float>(b(i));
      buf[9 + i] = static_cast<float>(c(i));
    }
    out.write(reinterpret_cast<const char*>(buf), sizeof(buf));
    const std::uint16_t attr = 0;
    out.write(reinterpret_cast<const char*>(&attr), 2);
  }
}

void write_stl_ascii(std::ostream& out, const TriMesh& mesh, const std::string& name) {
  out << "solid " << name << '\n' << std::setprecision(17);
  for (const auto& f : mesh.faces()) {
    const auto& a = mesh.vertices()[f[0]];
    const auto& b = mesh.vertices()[f[1]];
    const auto& c = mesh.vertices()[f[2]];
    Vec3 n = (b - a).cross(c - a);
    if (n.norm() > 0) n.normalize();
    out << "  facet normal " << n.x() << ' ' << n.y() << ' ' << n.z() << "\n    outer loop\n";
    for (const auto* v : {&a, &b, &c}) out << "      vertex " << v->x() << ' ' << v->y() << ' ' << v->z() << '\n';
    out << "    endloop\n  endfacet\n";
  }
  out << "endsolid " << name << '\n';
}

void write_stl_binary(const std::filesystem::path& path, const TriMesh& mesh) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::IoError, "cannot write " + path.string());
  write_stl_binary(out, mesh);
  if (!out) fail(ErrorCode::IoError, "write failed for " + path.string());
}

}  // namespace screwreg
