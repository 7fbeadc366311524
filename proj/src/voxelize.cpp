#include <algorithm>
#include <cmath>

#include "dpack/geometry.hpp"

namespace dpack {
namespace {

// Separating-axis test between a triangle and an axis-aligned box given by
// its center and half size.
bool triangle_box_overlap(const Vec3& center, double half, const Vec3& a,
                          const Vec3& b, const Vec3& c) {
  const Vec3 v0 = a - center, v1 = b - center, v2 = c - center;
  const Vec3 e0 = v1 - v0, e1 = v2 - v1, e2 = v0 - v2;

  auto separated = [&](const Vec3& axis) {
    if (axis.squaredNorm() < 1e-30) return false;
    const double p0 = axis.dot(v0), p1 = axis.dot(v1), p2 = axis.dot(v2);
    const double r = half * axis.cwiseAbs().sum();
    return std::min({p0, p1, p2}) > r || std::max({p0, p1, p2}) < -r;
  };

  for (int k = 0; k < 3; ++k) {
    if (separated(Vec3::Unit(k))) return false;
  }
  if (separated(e0.cross(e1))) return false;
  for (const Vec3& e : {e0, e1, e2}) {
    for (int k = 0; k < 3; ++k) {
      if (separated(Vec3::Unit(k).cross(e))) return false;
    }
  }
  return true;
}

enum class RayHit { Miss, Hit, Degenerate };

// Does the +x ray through (y, z) cross triangle abc? Reports the crossing x.
RayHit cast_x(const Vec3& a, const Vec3& b, const Vec3& c, double y, double z,
              double* x_hit) {
  // Barycentrics in the yz projection.
  const double d = (b.y() - a.y()) * (c.z() - a.z()) - (c.y() - a.y()) * (b.z() - a.z());
  if (std::abs(d) < 1e-300) return RayHit::Miss;  // face parallel to the ray
  const double w1 = ((y - a.y()) * (c.z() - a.z()) - (c.y() - a.y()) * (z - a.z())) / d;
  const double w2 = ((b.y() - a.y()) * (z - a.z()) - (y - a.y()) * (b.z() - a.z())) / d;
  const double w0 = 1.0 - w1 - w2;
  constexpr double kEdge = 1e-12;
  if (w0 < -kEdge || w1 < -kEdge || w2 < -kEdge) return RayHit::Miss;
  if (w0 <= kEdge || w1 <= kEdge || w2 <= kEdge) return RayHit::Degenerate;
  *x_hit = w0 * a.x() + w1 * b.x() + w2 * c.x();
  return RayHit::Hit;
}

// Sorted crossing abscissae of the +x line through (y, z), or false when the
// line grazes an edge or vertex.
bool crossings(const TriMesh& mesh, std::span<const int> candidates, double y,
               double z, std::vector<double>& xs) {
  xs.clear();
  for (int f : candidates) {
    const auto& t = mesh.triangles[f];
    double x = 0.0;
    switch (cast_x(mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]], y, z, &x)) {
      case RayHit::Miss:
        break;
      case RayHit::Hit:
        xs.push_back(x);
        break;
      case RayHit::Degenerate:
        return false;
    }
  }
  std::sort(xs.begin(), xs.end());
  return true;
}

bool odd_below(const std::vector<double>& xs, double x) {
  const auto n = std::lower_bound(xs.begin(), xs.end(), x) - xs.begin();
  return (n % 2) == 1;
}

}  // namespace

bool point_inside(const TriMesh& mesh, const Vec3& p, const VoxelizeOptions& opts) {
  std::vector<int> all(mesh.triangles.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
  std::vector<double> xs;
  Vec3 q = p;
  for (int attempt = 0; attempt < 8; ++attempt) {
    if (crossings(mesh, all, q.y(), q.z(), xs)) {
      // Crossings strictly beyond q along +x.
      const auto beyond = xs.end() - std::upper_bound(xs.begin(), xs.end(), q.x());
      return (beyond % 2) == 1;
    }
    q += opts.perturbation;
  }
  return false;
}

void voxelize_into(VoxelGrid& grid, const TriMesh& mesh, const VoxelizeOptions& opts) {
  require_closed_manifold(mesh);
  const Vec3i dims = grid.dims();
  if ((dims.array() <= 0).any()) return;
  const double cell = grid.cell_size();
  const Vec3 origin = grid.origin();

  auto cell_range = [&](double lo, double hi, int axis, int* i0, int* i1) {
    *i0 = std::max(0, static_cast<int>(std::floor((lo - origin[axis]) / cell)) - 1);
    *i1 = std::min(dims[axis] - 1, static_cast<int>(std::floor((hi - origin[axis]) / cell)) + 1);
    return *i0 <= *i1;
  };

  // Surface cells.
  const double half = 0.5 * cell - opts.boundary_tol * cell;
  std::vector<std::vector<int>> rows(static_cast<std::size_t>(dims.y()) * dims.z());
  for (std::size_t f = 0; f < mesh.triangles.size(); ++f) {
    const auto& t = mesh.triangles[f];
    const Vec3& a = mesh.vertices[t[0]];
    const Vec3& b = mesh.vertices[t[1]];
    const Vec3& c = mesh.vertices[t[2]];
    const Vec3 lo = a.cwiseMin(b).cwiseMin(c);
    const Vec3 hi = a.cwiseMax(b).cwiseMax(c);
    int x0, x1, y0, y1, z0, z1;
    const bool in_x = cell_range(lo.x(), hi.x(), 0, &x0, &x1);
    if (!cell_range(lo.y(), hi.y(), 1, &y0, &y1) || !cell_range(lo.z(), hi.z(), 2, &z0, &z1)) {
      continue;
    }
    for (int z = z0; z <= z1; ++z) {
      for (int y = y0; y <= y1; ++y) {
        rows[static_cast<std::size_t>(y) + static_cast<std::size_t>(dims.y()) * z].push_back(
            static_cast<int>(f));
        if (!in_x) continue;
        for (int x = x0; x <= x1; ++x) {
          if (grid.at(x, y, z)) continue;
          if (triangle_box_overlap(grid.cell_center(x, y, z), half, a, b, c)) {
            grid.set(x, y, z);
          }
        }
      }
    }
  }

  // Interior cells: parity along +x per row of cell centers.
  std::vector<double> xs;
  for (int z = 0; z < dims.z(); ++z) {
    for (int y = 0; y < dims.y(); ++y) {
      const auto& cand = rows[static_cast<std::size_t>(y) + static_cast<std::size_t>(dims.y()) * z];
      if (cand.empty()) continue;
      const Vec3 c0 = grid.cell_center(0, y, z);
      Vec3 shift = Vec3::Zero();
      bool ok = false;
      for (int attempt = 0; attempt < 8 && !ok; ++attempt) {
        ok = crossings(mesh, cand, c0.y() + shift.y(), c0.z() + shift.z(), xs);
        if (!ok) shift += opts.perturbation;
      }
      if (!ok || xs.empty()) continue;
      for (int x = 0; x < dims.x(); ++x) {
        if (grid.at(x, y, z)) continue;
        const double cx = origin.x() + (x + 0.5) * cell + shift.x();
        if (odd_below(xs, cx)) grid.set(x, y, z);
      }
    }
  }
}

VoxelGrid voxelize(const TriMesh& mesh, const Vec3& origin, double cell_size,
                   const Vec3i& dims, const VoxelizeOptions& opts) {
  VoxelGrid grid(origin, cell_size, dims);
  voxelize_into(grid, mesh, opts);
  return grid;
}

}  // namespace dpack
