#include <algorithm>
#include <cmath>

#include "dpack/geometry.hpp"

namespace dpack {
namespace {

struct Tri {
  Vec3 v[3];
  Vec3 normal;  // unit, outward
  Aabb box;
};

std::vector<Tri> triangles_of(const TriMesh& m) {
  std::vector<Tri> out;
  out.reserve(m.triangles.size());
  for (const auto& t : m.triangles) {
    Tri tri;
    for (int k = 0; k < 3; ++k) {
      tri.v[k] = m.vertices[t[k]];
      tri.box.extend(tri.v[k]);
    }
    tri.normal = (tri.v[1] - tri.v[0]).cross(tri.v[2] - tri.v[0]).normalized();
    out.push_back(tri);
  }
  return out;
}

// Closest point on triangle abc to p (Ericson, Real-Time Collision Detection).
Vec3 closest_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 ab = b - a, ac = c - a, ap = p - a;
  const double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return a;
  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return b;
  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) return a + (d1 / (d1 - d3)) * ab;
  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return c;
  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) return a + (d2 / (d2 - d6)) * ac;
  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    return b + ((d4 - d3) / ((d4 - d3) + (d5 - d6))) * (c - b);
  }
  const double denom = 1.0 / (va + vb + vc);
  return a + ab * (vb * denom) + ac * (vc * denom);
}

double distance_to_triangle(const Vec3& p, const Tri& t) {
  return (p - closest_on_triangle(p, t.v[0], t.v[1], t.v[2])).norm();
}

double distance_to_surface(const Vec3& p, const std::vector<Tri>& tris) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& t : tris) best = std::min(best, distance_to_triangle(p, t));
  return best;
}

// Inclusive segment/triangle test, segment not coplanar with the triangle.
bool segment_hits_triangle(const Vec3& p, const Vec3& q, const Tri& t, double tol) {
  const double dp = t.normal.dot(p - t.v[0]);
  const double dq = t.normal.dot(q - t.v[0]);
  if ((dp > tol && dq > tol) || (dp < -tol && dq < -tol)) return false;
  if (std::abs(dp - dq) <= 1e-300) return false;
  const double s = dp / (dp - dq);
  const Vec3 x = p + std::clamp(s, 0.0, 1.0) * (q - p);
  for (int k = 0; k < 3; ++k) {
    const Vec3& a = t.v[k];
    const Vec3& b = t.v[(k + 1) % 3];
    if ((b - a).cross(x - a).dot(t.normal) < -tol * (b - a).norm()) return false;
  }
  return true;
}

enum class Contact { None, Coplanar, Crossing };

Contact classify(const Tri& s, const Tri& t, double tol) {
  double ds[3], dt[3];
  for (int k = 0; k < 3; ++k) {
    ds[k] = t.normal.dot(s.v[k] - t.v[0]);
    dt[k] = s.normal.dot(t.v[k] - s.v[0]);
  }
  auto one_side = [tol](const double* d) {
    return (d[0] > tol && d[1] > tol && d[2] > tol) ||
           (d[0] < -tol && d[1] < -tol && d[2] < -tol);
  };
  if (one_side(ds) || one_side(dt)) return Contact::None;
  auto flat = [tol](const double* d) {
    return std::abs(d[0]) <= tol && std::abs(d[1]) <= tol && std::abs(d[2]) <= tol;
  };
  if (flat(ds) || flat(dt)) return Contact::Coplanar;
  for (int k = 0; k < 3; ++k) {
    if (segment_hits_triangle(s.v[k], s.v[(k + 1) % 3], t, tol)) return Contact::Crossing;
    if (segment_hits_triangle(t.v[k], t.v[(k + 1) % 3], s, tol)) return Contact::Crossing;
  }
  return Contact::None;
}

// Part of triangle `s` on the plane of `t`, as an interval of the line
// direction `dir`. False when `s` misses the plane.
bool plane_section(const Tri& s, const Tri& t, const Vec3& dir, double tol, double& lo,
                   double& hi, Vec3& at_lo, Vec3& at_hi) {
  double d[3];
  for (int k = 0; k < 3; ++k) d[k] = t.normal.dot(s.v[k] - t.v[0]);
  bool any = false;
  auto take = [&](const Vec3& p) {
    const double u = dir.dot(p);
    if (!any || u < lo) lo = u, at_lo = p;
    if (!any || u > hi) hi = u, at_hi = p;
    any = true;
  };
  for (int k = 0; k < 3; ++k) {
    if (std::abs(d[k]) <= tol) take(s.v[k]);
    const int n = (k + 1) % 3;
    if ((d[k] > tol && d[n] < -tol) || (d[k] < -tol && d[n] > tol)) {
      take(s.v[k] + (d[k] / (d[k] - d[n])) * (s.v[n] - s.v[k]));
    }
  }
  return any;
}

// Common segment of two non-coplanar triangles.
bool intersection_segment(const Tri& s, const Tri& t, double tol, Vec3& p, Vec3& q) {
  const Vec3 dir = s.normal.cross(t.normal);
  if (dir.norm() < 1e-12) return false;
  double slo, shi, tlo, thi;
  Vec3 sp, sq, tp, tq;
  if (!plane_section(s, t, dir, tol, slo, shi, sp, sq)) return false;
  if (!plane_section(t, s, dir, tol, tlo, thi, tp, tq)) return false;
  const double lo = std::max(slo, tlo), hi = std::min(shi, thi);
  if (lo > hi + tol) return false;
  p = slo >= tlo ? sp : tp;
  q = shi <= thi ? sq : tq;
  return true;
}

bool deep_inside(const Vec3& p, const TriMesh& mesh, const std::vector<Tri>& tris, double eps) {
  return distance_to_surface(p, tris) > eps && point_inside(mesh, p);
}

// Probes just inside both solids next to where s and t cross. A probe that
// sits more than eps deep in both meshes means they interpenetrate; faces that
// merely touch put every probe outside one of them.
bool crossing_penetrates(const Tri& s, const Tri& t, double tol, double eps, const TriMesh& a,
                         const std::vector<Tri>& ta, const TriMesh& b,
                         const std::vector<Tri>& tb) {
  Vec3 p, q;
  if (!intersection_segment(s, t, tol, p, q)) return false;
  const Vec3 w = -(s.normal + t.normal);
  const double wn = w.norm();
  if (wn < 1e-6) return false;  // opposed faces only touch
  // Distance to each plane is step * wn / 2; aim for 2 eps.
  const Vec3 offset = (4.0 * eps / (wn * wn)) * w;
  for (double f : {0.5, 0.25, 0.75}) {
    const Vec3 probe = p + f * (q - p) + offset;
    if (deep_inside(probe, a, ta, eps) && deep_inside(probe, b, tb, eps)) return true;
  }
  return false;
}

bool near_anchor(const Tri& t, std::span<const Vec3> anchors, double radius) {
  for (const auto& a : anchors) {
    if (distance_to_triangle(a, t) <= radius) return true;
  }
  return false;
}

bool near_anchor(const Vec3& p, std::span<const Vec3> anchors, double radius) {
  for (const auto& a : anchors) {
    if ((p - a).norm() <= radius) return true;
  }
  return false;
}

bool vertex_buried(const TriMesh& from, const TriMesh& into,
                   const std::vector<Tri>& into_tris, const Aabb& into_box,
                   double eps, std::span<const Vec3> anchors) {
  for (const auto& v : from.vertices) {
    if (!into_box.overlaps(Aabb{v, v}, 0.0)) continue;
    if (near_anchor(v, anchors, 2.0 * eps)) continue;
    if (distance_to_surface(v, into_tris) <= eps) continue;
    if (point_inside(into, v)) return true;
  }
  return false;
}

}  // namespace

bool meshes_intersect(const TriMesh& a, const TriMesh& b, double eps,
                      std::span<const Vec3> exempt_anchors) {
  const Aabb box_a = bounding_box(a);
  const Aabb box_b = bounding_box(b);
  if (!box_a.overlaps(box_b, eps)) return false;

  const auto ta = triangles_of(a);
  const auto tb = triangles_of(b);
  Aabb both = box_a;
  both.extend(box_b);
  const double tol = 1e-12 * std::max(1.0, both.extent().norm());
  const double exempt = 2.0 * eps;

  for (const auto& s : ta) {
    if (!s.box.overlaps(box_b, tol)) continue;
    const bool s_exempt = !exempt_anchors.empty() && near_anchor(s, exempt_anchors, exempt);
    for (const auto& t : tb) {
      if (!s.box.overlaps(t.box, tol)) continue;
      if (classify(s, t, tol) != Contact::Crossing) continue;
      if (s_exempt && near_anchor(t, exempt_anchors, exempt)) continue;
      if (crossing_penetrates(s, t, tol, eps, a, ta, b, tb)) return true;
    }
  }

  return vertex_buried(a, b, tb, box_b, eps, exempt_anchors) ||
         vertex_buried(b, a, ta, box_a, eps, exempt_anchors);
}

}  // namespace dpack
