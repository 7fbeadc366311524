#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "dpack/geometry.hpp"

namespace dpack {
namespace {

struct HullFace {
  Triangle v{};
  Vec3 normal = Vec3::Zero();
  double offset = 0.0;
  std::vector<int> outside;
  bool alive = true;

  double distance(const Vec3& p) const { return normal.dot(p) - offset; }
};

class HullBuilder {
 public:
  HullBuilder(std::span<const Vec3> points, double eps) : pts_(points), eps_(eps) {}

  void build() {
    seed();
    for (int pass = 0; pass < 8; ++pass) {
      grow();
      if (!reassign_escaped()) break;
    }
  }

  TriMesh result() const {
    std::set<int> used;
    for (const auto& f : faces_) {
      if (f.alive) used.insert(f.v.begin(), f.v.end());
    }
    std::map<int, int> remap;
    TriMesh out;
    for (int i : used) {
      remap[i] = static_cast<int>(out.vertices.size());
      out.vertices.push_back(pts_[i]);
    }
    for (const auto& f : faces_) {
      if (!f.alive) continue;
      out.triangles.push_back({remap.at(f.v[0]), remap.at(f.v[1]), remap.at(f.v[2])});
    }
    return out;
  }

 private:
  int add_face(int a, int b, int c) {
    HullFace f;
    f.v = {a, b, c};
    const Vec3 n = (pts_[b] - pts_[a]).cross(pts_[c] - pts_[a]);
    const double len = n.norm();
    f.normal = len > 0.0 ? Vec3(n / len) : Vec3::Zero();
    f.offset = f.normal.dot(pts_[a]);
    faces_.push_back(std::move(f));
    return static_cast<int>(faces_.size()) - 1;
  }

  void seed() {
    const int n = static_cast<int>(pts_.size());
    if (n < 4) throw DegenerateInput("convex hull needs at least 4 points");

    // Extreme points along the coordinate axes; the farthest pair seeds the
    // initial edge.
    std::array<int, 6> extremes{};
    extremes.fill(0);
    for (int i = 1; i < n; ++i) {
      for (int k = 0; k < 3; ++k) {
        if (pts_[i][k] < pts_[extremes[2 * k]][k]) extremes[2 * k] = i;
        if (pts_[i][k] > pts_[extremes[2 * k + 1]][k]) extremes[2 * k + 1] = i;
      }
    }
    int i0 = 0, i1 = 0;
    double best = -1.0;
    for (int a : extremes) {
      for (int b : extremes) {
        const double d = (pts_[a] - pts_[b]).squaredNorm();
        if (d > best) {
          best = d;
          i0 = a;
          i1 = b;
        }
      }
    }
    if (std::sqrt(best) <= eps_) throw DegenerateInput("points are coincident");

    const Vec3 dir = (pts_[i1] - pts_[i0]).normalized();
    int i2 = -1;
    best = eps_;
    for (int i = 0; i < n; ++i) {
      const Vec3 r = pts_[i] - pts_[i0];
      const double d = (r - r.dot(dir) * dir).norm();
      if (d > best) {
        best = d;
        i2 = i;
      }
    }
    if (i2 < 0) throw DegenerateInput("points are collinear");

    const Vec3 pn = (pts_[i1] - pts_[i0]).cross(pts_[i2] - pts_[i0]).normalized();
    int i3 = -1;
    best = eps_;
    for (int i = 0; i < n; ++i) {
      const double d = std::abs(pn.dot(pts_[i] - pts_[i0]));
      if (d > best) {
        best = d;
        i3 = i;
      }
    }
    if (i3 < 0) throw DegenerateInput("points are coplanar");

    const Vec3 centroid = (pts_[i0] + pts_[i1] + pts_[i2] + pts_[i3]) / 4.0;
    const std::array<Triangle, 4> tets{{{i0, i1, i2}, {i0, i3, i1}, {i1, i3, i2}, {i0, i2, i3}}};
    for (auto t : tets) {
      const int f = add_face(t[0], t[1], t[2]);
      if (faces_[f].distance(centroid) > 0.0) {
        faces_.pop_back();
        add_face(t[0], t[2], t[1]);
      }
    }
    std::vector<int> rest;
    for (int i = 0; i < n; ++i) {
      if (i != i0 && i != i1 && i != i2 && i != i3) rest.push_back(i);
    }
    assign(rest, 0);
  }

  // Assigns each point to the face (index >= first_face) it lies farthest
  // above; points above no face are interior and dropped.
  void assign(const std::vector<int>& candidates, std::size_t first_face) {
    for (int i : candidates) {
      int best_face = -1;
      double best = eps_;
      for (std::size_t f = first_face; f < faces_.size(); ++f) {
        if (!faces_[f].alive) continue;
        const double d = faces_[f].distance(pts_[i]);
        if (d > best) {
          best = d;
          best_face = static_cast<int>(f);
        }
      }
      if (best_face >= 0) faces_[best_face].outside.push_back(i);
    }
  }

  void grow() {
    for (std::size_t cursor = 0; cursor < faces_.size(); ++cursor) {
      HullFace& face = faces_[cursor];
      if (!face.alive || face.outside.empty()) continue;

      int apex = face.outside.front();
      double far = face.distance(pts_[apex]);
      for (int i : face.outside) {
        const double d = face.distance(pts_[i]);
        if (d > far) {
          far = d;
          apex = i;
        }
      }
      const Vec3& p = pts_[apex];

      std::vector<int> visible;
      for (std::size_t f = 0; f < faces_.size(); ++f) {
        if (faces_[f].alive && faces_[f].distance(p) > eps_) {
          visible.push_back(static_cast<int>(f));
        }
      }
      std::set<std::pair<int, int>> visible_edges;
      for (int f : visible) {
        const auto& v = faces_[f].v;
        for (int k = 0; k < 3; ++k) visible_edges.insert({v[k], v[(k + 1) % 3]});
      }
      std::vector<std::pair<int, int>> horizon;
      for (int f : visible) {
        const auto& v = faces_[f].v;
        for (int k = 0; k < 3; ++k) {
          const int a = v[k], b = v[(k + 1) % 3];
          if (!visible_edges.count({b, a})) horizon.emplace_back(a, b);
        }
      }

      std::vector<int> orphans;
      for (int f : visible) {
        faces_[f].alive = false;
        for (int i : faces_[f].outside) {
          if (i != apex) orphans.push_back(i);
        }
        faces_[f].outside.clear();
      }
      const std::size_t first_new = faces_.size();
      for (const auto& [a, b] : horizon) add_face(a, b, apex);
      assign(orphans, first_new);
      // faces_ may have reallocated; the loop re-reads by index.
      cursor = static_cast<std::size_t>(-1);
    }
  }

  // Final sweep: any point left above a live face goes back into play.
  bool reassign_escaped() {
    std::vector<int> escaped;
    for (int i = 0; i < static_cast<int>(pts_.size()); ++i) {
      for (const auto& f : faces_) {
        if (f.alive && f.distance(pts_[i]) > eps_) {
          escaped.push_back(i);
          break;
        }
      }
    }
    if (escaped.empty()) return false;
    assign(escaped, 0);
    return true;
  }

  std::span<const Vec3> pts_;
  double eps_;
  std::vector<HullFace> faces_;
};

}  // namespace

TriMesh convex_hull(std::span<const Vec3> points, const HullOptions& opts) {
  if (points.size() < 4) throw DegenerateInput("convex hull needs at least 4 points");
  const double scale = bounding_box(points).extent().norm();
  if (!(scale > 0.0)) throw DegenerateInput("points are coincident");
  HullBuilder builder(points, opts.relative_eps * scale);
  builder.build();
  return builder.result();
}

}  // namespace dpack
