#pragma once

#include "screwreg/geometry.hpp"

#include <Eigen/Geometry>

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace screwreg {

using Face = std::array<std::uint32_t, 3>;

class TriMesh {
 public:
  TriMesh() = default;
  /// Validates face indices and rejects faces that repeat a vertex.
  TriMesh(std::vector<Point3> vertices, std::vector<Face> faces);

  const std::vector<Point3>& vertices() const { return vertices_; }
  const std::vector<Face>& faces() const { return faces_; }
  std::size_t vertex_count() const { return vertices_.size(); }
  std::size_t face_count() const { return faces_.size(); }
  bool empty() const { return faces_.empty(); }

 private:
  std::vector<Point3> vertices_;
  std::vector<Face> faces_;
};

/// Mesh plus tip/center landmarks in the model frame. The canonical axis points
/// from tip to center.
class ScrewModel {
 public:
  ScrewModel() = default;
  ScrewModel(TriMesh mesh, Point3 canonical_tip, Point3 canonical_center);

  const TriMesh& mesh() const { return mesh_; }
  const Point3& canonical_tip() const { return tip_; }
  const Point3& canonical_center() const { return center_; }
  Vec3 canonical_axis() const { return (center_ - tip_).normalized(); }
  double tip_to_center_length() const { return (center_ - tip_).norm(); }

 private:
  TriMesh mesh_;
  Point3 tip_ = Point3::Zero();
  Point3 center_ = Point3::UnitZ();
};

/// Euler angles in degrees applied extrinsically Z, then Y, then X
/// (R = Rx * Ry * Rz), plus a translation in millimeters.
struct RigidPose {
  double rz = 0.0;
  double ry = 0.0;
  double rx = 0.0;
  Vec3 translation = Vec3::Zero();

  static RigidPose identity() { return {}; }
  Eigen::Matrix3d rotation() const;
  /// Angles wrapped to (-180, 180].
  RigidPose normalized() const;
  /// Maps v to R (v - pivot) + pivot + t.
  Eigen::Isometry3d transform(const Point3& pivot) const;

  friend bool operator==(const RigidPose& a, const RigidPose& b) {
    return a.rz == b.rz && a.ry == b.ry && a.rx == b.rx && a.translation == b.translation;
  }
};

double normalize_degrees(double angle);
Eigen::Matrix3d euler_zyx_to_matrix(double rz_deg, double ry_deg, double rx_deg);
/// Inverse of euler_zyx_to_matrix; returns (rz, ry, rx) in degrees.
Eigen::Vector3d matrix_to_euler_zyx(const Eigen::Matrix3d& R);
RigidPose pose_from(const Eigen::Matrix3d& R, const Vec3& translation);

/// Inverse about the same pivot: apply_pose(apply_pose(m, p, c), inverse(p), c) == m.
RigidPose inverse(const RigidPose& pose);

/// `outer` applied after `inner`; both pivot at `pivot`.
RigidPose compose(const RigidPose& outer, const RigidPose& inner, const Point3& pivot);

Point3 apply_pose(const Point3& v, const RigidPose& pose, const Point3& pivot);
TriMesh apply_pose(const TriMesh& mesh, const RigidPose& pose, const Point3& pivot);

/// Pose (pivot = canonical tip) placing the tip at tip_world with the canonical
/// axis along center_world - tip_world, then rotated by axial_deg about that axis.
RigidPose align_to_landmarks(const ScrewModel& model, const Point3& tip_world,
                             const Point3& center_world, double axial_deg);

/// Minimal rotation taking unit vector `from` onto unit vector `to`. The
/// antipodal case rotates by pi about an axis orthogonal to `from`.
Eigen::Matrix3d minimal_rotation(const Vec3& from, const Vec3& to);

double axis_angle_deg(const Vec3& a, const Vec3& b);

enum class MeshFormat { Auto, StlAscii, StlBinary };

/// Reads an STL triangle soup. Vertices are deduplicated by exact coordinate.
TriMesh load_mesh(std::istream& in, MeshFormat format = MeshFormat::Auto);
TriMesh load_mesh(const std::filesystem::path& path, MeshFormat format = MeshFormat::Auto);

void write_stl_binary(std::ostream& out, const TriMesh& mesh, const std::string& header = "screwreg");
void write_stl_ascii(std::ostream& out, const TriMesh& mesh, const std::string& name = "screwreg");
void write_stl_binary(const std::filesystem::path& path, const TriMesh& mesh);

}  // namespace screwreg
