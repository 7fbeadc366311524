#include "dpack/geometry.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace dpack {

// ---------------------------------------------------------------------------
// TriMesh

std::vector<std::string> mesh_violations(const TriMesh& mesh, double min_area) {
  std::vector<std::string> out;
  const int n = static_cast<int>(mesh.vertices.size());
  for (std::size_t f = 0; f < mesh.triangles.size(); ++f) {
    const auto& t = mesh.triangles[f];
    bool in_range = true;
    for (int i : t) {
      if (i < 0 || i >= n) in_range = false;
    }
    if (!in_range) {
      std::ostringstream os;
      os << "triangle " << f << ": index out of range";
      out.push_back(os.str());
      continue;
    }
    if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2]) {
      std::ostringstream os;
      os << "triangle " << f << ": repeated vertex index";
      out.push_back(os.str());
      continue;
    }
    const Vec3& a = mesh.vertices[t[0]];
    const Vec3& b = mesh.vertices[t[1]];
    const Vec3& c = mesh.vertices[t[2]];
    const double area = 0.5 * (b - a).cross(c - a).norm();
    if (!(area > min_area)) {
      std::ostringstream os;
      os << "triangle " << f << ": degenerate (area " << area << ")";
      out.push_back(os.str());
    }
  }
  return out;
}

TriMesh TriMesh::validated(std::vector<Vec3> vertices,
                           std::vector<Triangle> triangles, double min_area) {
  TriMesh mesh{std::move(vertices), std::move(triangles)};
  const auto violations = mesh_violations(mesh, min_area);
  if (!violations.empty()) {
    throw InvalidInput("invalid mesh: " + violations.front());
  }
  return mesh;
}

bool is_closed_manifold(const TriMesh& mesh) {
  if (mesh.triangles.empty()) return false;
  // Directed edge -> use count. A closed, consistently wound surface uses each
  // directed edge once and its reverse once.
  std::map<std::pair<int, int>, int> directed;
  for (const auto& t : mesh.triangles) {
    for (int k = 0; k < 3; ++k) {
      ++directed[{t[k], t[(k + 1) % 3]}];
    }
  }
  for (const auto& [edge, count] : directed) {
    if (count != 1) return false;
    auto it = directed.find({edge.second, edge.first});
    if (it == directed.end() || it->second != 1) return false;
  }
  return true;
}

void require_closed_manifold(const TriMesh& mesh) {
  if (!is_closed_manifold(mesh)) {
    throw NotWatertight(
        "mesh is not closed: every edge must be shared by exactly two "
        "oppositely wound triangles");
  }
}

Aabb bounding_box(std::span<const Vec3> points) {
  Aabb box;
  for (const auto& p : points) box.extend(p);
  return box;
}

double surface_area(const TriMesh& mesh) {
  double area = 0.0;
  for (const auto& t : mesh.triangles) {
    const Vec3& a = mesh.vertices[t[0]];
    area += 0.5 * (mesh.vertices[t[1]] - a).cross(mesh.vertices[t[2]] - a).norm();
  }
  return area;
}

TriMesh merge_meshes(std::span<const TriMesh> meshes) {
  TriMesh out;
  for (const auto& m : meshes) {
    const int base = static_cast<int>(out.vertices.size());
    out.vertices.insert(out.vertices.end(), m.vertices.begin(), m.vertices.end());
    for (const auto& t : m.triangles) {
      out.triangles.push_back({t[0] + base, t[1] + base, t[2] + base});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// RigidTransform

RigidTransform::RigidTransform(const Quat& rotation, const Vec3& translation)
    : rotation_(rotation.normalized()), translation_(translation) {}

RigidTransform RigidTransform::about_axis(const Vec3& anchor, const Vec3& axis,
                                          double angle) {
  const Quat q(Eigen::AngleAxisd(angle, axis.normalized()));
  // p -> R (p - anchor) + anchor
  return {q, anchor - (q * anchor)};
}

Eigen::Matrix4d RigidTransform::matrix() const {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = rotation_matrix();
  m.topRightCorner<3, 1>() = translation_;
  return m;
}

RigidTransform RigidTransform::operator*(const RigidTransform& other) const {
  return {rotation_ * other.rotation_, rotation_ * other.translation_ + translation_};
}

RigidTransform RigidTransform::inverse() const {
  const Quat inv = rotation_.conjugate();
  return {inv, -(inv * translation_)};
}

bool RigidTransform::is_approx(const RigidTransform& other, double tol) const {
  return (matrix() - other.matrix()).cwiseAbs().maxCoeff() <= tol;
}

TriMesh transform_mesh(const TriMesh& mesh, const RigidTransform& t) {
  TriMesh out;
  out.triangles = mesh.triangles;
  transform_points(mesh.vertices, t, out.vertices);
  return out;
}

void transform_points(std::span<const Vec3> in, const RigidTransform& t,
                      std::vector<Vec3>& out) {
  const Mat3 r = t.rotation_matrix();
  out.resize(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) {
    out[i] = r * in[i] + t.translation();
  }
}

// ---------------------------------------------------------------------------
// Volume

double signed_volume_unchecked(const TriMesh& mesh) {
  // Sum of signed tetrahedra against a local origin to limit cancellation.
  const Vec3 ref = mesh.vertices.empty() ? Vec3::Zero() : mesh.vertices.front();
  double six_v = 0.0;
  for (const auto& t : mesh.triangles) {
    const Vec3 a = mesh.vertices[t[0]] - ref;
    const Vec3 b = mesh.vertices[t[1]] - ref;
    const Vec3 c = mesh.vertices[t[2]] - ref;
    six_v += a.dot(b.cross(c));
  }
  return six_v / 6.0;
}

double mesh_volume(const TriMesh& mesh) {
  require_closed_manifold(mesh);
  return signed_volume_unchecked(mesh);
}

// ---------------------------------------------------------------------------
// Obb

RigidTransform Obb::world_to_box() const {
  const Quat inv = orientation.conjugate();
  return {inv, -(inv * center)};
}

bool Obb::contains(const Vec3& p, double tol) const {
  const Vec3 local = orientation.conjugate() * (p - center);
  return (local.cwiseAbs().array() <= half_extents.array() + tol).all();
}

// ---------------------------------------------------------------------------
// VoxelGrid

VoxelGrid::VoxelGrid(const Vec3& origin, double cell_size, const Vec3i& dims)
    : origin_(origin), cell_size_(cell_size), dims_(dims) {
  if (!(cell_size > 0.0)) throw InvalidInput("voxel cell size must be positive");
  if ((dims.array() < 0).any()) throw InvalidInput("voxel dims must be >= 0");
  cells_.assign(static_cast<std::size_t>(dims.x()) * dims.y() * dims.z(), 0);
}

std::size_t VoxelGrid::count() const {
  return static_cast<std::size_t>(std::count(cells_.begin(), cells_.end(), 1));
}

void VoxelGrid::grow_z(int nz) {
  if (nz <= dims_.z()) return;
  dims_.z() = nz;
  cells_.resize(static_cast<std::size_t>(dims_.x()) * dims_.y() * nz, 0);
}

VoxelGrid& VoxelGrid::operator|=(const VoxelGrid& other) {
  if (other.dims_ != dims_) throw InvalidInput("voxel grid shape mismatch");
  for (std::size_t i = 0; i < cells_.size(); ++i) cells_[i] |= other.cells_[i];
  return *this;
}

}  // namespace dpack
