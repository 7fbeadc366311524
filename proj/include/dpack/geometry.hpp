#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "dpack/errors.hpp"

namespace dpack {

using Vec3 = Eigen::Vector3d;
using Vec3i = Eigen::Vector3i;
using Mat3 = Eigen::Matrix3d;
using Quat = Eigen::Quaterniond;
using Triangle = std::array<int, 3>;

inline constexpr double kPi = 3.14159265358979323846;

inline constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }

// ---------------------------------------------------------------------------
// Meshes

/// Indexed triangle surface. Coordinates are in meters.
struct TriMesh {
  std::vector<Vec3> vertices;
  std::vector<Triangle> triangles;

  /// Builds a mesh and checks index range, repeated indices and face area.
  /// Throws InvalidInput listing the first violation.
  static TriMesh validated(std::vector<Vec3> vertices,
                           std::vector<Triangle> triangles,
                           double min_area = 1e-12);

  bool empty() const { return triangles.empty(); }
};

/// One message per violated mesh invariant; empty when the mesh is valid.
std::vector<std::string> mesh_violations(const TriMesh& mesh,
                                         double min_area = 1e-12);

/// Every undirected edge is used by exactly two faces with opposite winding.
bool is_closed_manifold(const TriMesh& mesh);

/// Throws NotWatertight when is_closed_manifold() is false.
void require_closed_manifold(const TriMesh& mesh);

struct Aabb {
  Vec3 min = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 max = Vec3::Constant(-std::numeric_limits<double>::infinity());

  void extend(const Vec3& p) {
    min = min.cwiseMin(p);
    max = max.cwiseMax(p);
  }
  void extend(const Aabb& other) {
    min = min.cwiseMin(other.min);
    max = max.cwiseMax(other.max);
  }
  bool valid() const { return (min.array() <= max.array()).all(); }
  Vec3 extent() const { return max - min; }
  double volume() const { return valid() ? extent().prod() : 0.0; }
  bool overlaps(const Aabb& o, double pad = 0.0) const {
    return (min.array() - pad <= o.max.array()).all() &&
           (o.min.array() - pad <= max.array()).all();
  }
};

Aabb bounding_box(std::span<const Vec3> points);
inline Aabb bounding_box(const TriMesh& mesh) {
  return bounding_box(mesh.vertices);
}

double surface_area(const TriMesh& mesh);

/// Concatenates meshes into one indexed mesh (no welding).
TriMesh merge_meshes(std::span<const TriMesh> meshes);

// ---------------------------------------------------------------------------
// Rigid transforms

/// Rotation followed by translation: p -> R p + t.
class RigidTransform {
 public:
  RigidTransform() = default;
  /// The quaternion is normalized on construction.
  RigidTransform(const Quat& rotation, const Vec3& translation);

  static RigidTransform identity() { return {}; }
  static RigidTransform from_translation(const Vec3& t) {
    return {Quat::Identity(), t};
  }
  /// Rotation by `angle` radians about the line through `anchor` along `axis`.
  static RigidTransform about_axis(const Vec3& anchor, const Vec3& axis,
                                   double angle);

  const Quat& rotation() const { return rotation_; }
  const Vec3& translation() const { return translation_; }
  Mat3 rotation_matrix() const { return rotation_.toRotationMatrix(); }
  Eigen::Matrix4d matrix() const;

  Vec3 operator*(const Vec3& p) const { return rotation_ * p + translation_; }
  /// (a * b)(p) == a(b(p))
  RigidTransform operator*(const RigidTransform& other) const;
  RigidTransform inverse() const;

  bool is_approx(const RigidTransform& other, double tol = 1e-9) const;

 private:
  Quat rotation_ = Quat::Identity();
  Vec3 translation_ = Vec3::Zero();
};

TriMesh transform_mesh(const TriMesh& mesh, const RigidTransform& t);

void transform_points(std::span<const Vec3> in, const RigidTransform& t,
                      std::vector<Vec3>& out);

// ---------------------------------------------------------------------------
// Volume and hull

/// Signed divergence-theorem volume; requires a closed, consistently oriented
/// mesh (throws NotWatertight otherwise).
double mesh_volume(const TriMesh& mesh);

/// Volume without the manifold check, for meshes already known to be closed.
double signed_volume_unchecked(const TriMesh& mesh);

struct HullOptions {
  /// Points closer than this (relative to the bounding-box diagonal) to a hull
  /// face count as lying on it.
  double relative_eps = 1e-11;
};

/// Convex hull of a point set. Only hull vertices appear in the result, in
/// increasing input-index order. Throws DegenerateInput for fewer than four
/// points or an affinely dependent (coplanar) set.
TriMesh convex_hull(std::span<const Vec3> points, const HullOptions& opts = {});

// ---------------------------------------------------------------------------
// Oriented bounding boxes

struct Obb {
  Vec3 center = Vec3::Zero();
  Vec3 half_extents = Vec3::Constant(1e-9);
  Quat orientation = Quat::Identity();

  double volume() const { return 8.0 * half_extents.prod(); }
  /// Columns are the box axes in world coordinates.
  Mat3 axes() const { return orientation.toRotationMatrix(); }
  double longest_edge() const { return 2.0 * half_extents.maxCoeff(); }
  /// World -> box frame (center at origin, axes along x, y, z).
  RigidTransform world_to_box() const;
  bool contains(const Vec3& p, double tol = 1e-7) const;
};

struct ObbOptions {
  /// Grid spacing of the orientation search.
  double angular_step = deg_to_rad(6.0);
  /// Local refinement stops once its step drops below this.
  double refine_min_step = deg_to_rad(0.1);
  /// How many of the best grid orientations get refined.
  int refine_seeds = 8;
  /// Lower bound applied to every half extent, for flat inputs.
  double half_extent_floor = 1e-9;
  HullOptions hull{};
};

/// Approximate minimum-volume OBB. The point set is reduced to its convex hull,
/// then orientations are searched on a grid and the best one is refined.
/// Throws DegenerateInput when the points span fewer than two dimensions.
Obb min_obb(std::span<const Vec3> points, const ObbOptions& opts = {});
inline Obb min_obb(const TriMesh& mesh, const ObbOptions& opts = {}) {
  return min_obb(mesh.vertices, opts);
}

/// Number of orientations min_obb() evaluates in its grid phase.
std::size_t obb_search_size(double angular_step);

/// Box extents of `points` in the frame given by the columns of `axes`.
Obb fit_obb(std::span<const Vec3> points, const Mat3& axes,
            double half_extent_floor = 1e-9);

// ---------------------------------------------------------------------------
// Voxel grids

class VoxelGrid {
 public:
  VoxelGrid() = default;
  VoxelGrid(const Vec3& origin, double cell_size, const Vec3i& dims);

  const Vec3& origin() const { return origin_; }
  double cell_size() const { return cell_size_; }
  const Vec3i& dims() const { return dims_; }
  std::size_t size() const { return cells_.size(); }

  std::size_t index(int x, int y, int z) const {
    return static_cast<std::size_t>(x) +
           static_cast<std::size_t>(dims_.x()) *
               (static_cast<std::size_t>(y) +
                static_cast<std::size_t>(dims_.y()) * static_cast<std::size_t>(z));
  }
  bool in_bounds(int x, int y, int z) const {
    return x >= 0 && y >= 0 && z >= 0 && x < dims_.x() && y < dims_.y() &&
           z < dims_.z();
  }
  bool at(int x, int y, int z) const { return cells_[index(x, y, z)] != 0; }
  void set(int x, int y, int z, bool v = true) {
    cells_[index(x, y, z)] = v ? 1 : 0;
  }

  Vec3 cell_min(int x, int y, int z) const {
    return origin_ + cell_size_ * Vec3(x, y, z);
  }
  Vec3 cell_center(int x, int y, int z) const {
    return origin_ + cell_size_ * Vec3(x + 0.5, y + 0.5, z + 0.5);
  }

  std::size_t count() const;
  double occupied_volume() const {
    return static_cast<double>(count()) * cell_size_ * cell_size_ * cell_size_;
  }

  /// Grows the z dimension to at least `nz`, keeping existing cells.
  void grow_z(int nz);
  /// Cell-wise OR with a grid of the same shape.
  VoxelGrid& operator|=(const VoxelGrid& other);

  friend bool operator==(const VoxelGrid&, const VoxelGrid&) = default;

 private:
  Vec3 origin_ = Vec3::Zero();
  double cell_size_ = 1.0;
  Vec3i dims_ = Vec3i::Zero();
  std::vector<std::uint8_t> cells_;
};

struct VoxelizeOptions {
  /// Applied to the ray origin when the inside test hits an edge or vertex.
  Vec3 perturbation{1e-7, 2e-7, 3e-7};
  /// Triangles that only touch a cell within this fraction of cell_size do
  /// not mark it.
  double boundary_tol = 1e-9;
};

/// Conservative solid voxelization: a cell is set when its center is inside
/// the mesh or any triangle reaches into it. Requires a closed mesh.
VoxelGrid voxelize(const TriMesh& mesh, const Vec3& origin, double cell_size,
                   const Vec3i& dims, const VoxelizeOptions& opts = {});

/// Same as voxelize() but ORs into an existing grid.
void voxelize_into(VoxelGrid& grid, const TriMesh& mesh,
                   const VoxelizeOptions& opts = {});

/// Parity test along +x. The mesh must be closed.
bool point_inside(const TriMesh& mesh, const Vec3& p,
                  const VoxelizeOptions& opts = {});

// ---------------------------------------------------------------------------
// Interpenetration

/// True when the meshes interpenetrate by more than `eps`. Surface contact is
/// not penetration. Triangle pairs and vertices within 2*eps of any point in
/// `exempt_anchors` are ignored.
bool meshes_intersect(const TriMesh& a, const TriMesh& b, double eps = 1e-6,
                      std::span<const Vec3> exempt_anchors = {});

}  // namespace dpack
