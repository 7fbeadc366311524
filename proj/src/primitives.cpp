#include "dpack/primitives.hpp"

#include <cmath>
#include <map>

namespace dpack {

TriMesh make_box(const Vec3& min, const Vec3& max) {
  TriMesh m;
  for (int i = 0; i < 8; ++i) {
    m.vertices.emplace_back((i & 1) ? max.x() : min.x(), (i & 2) ? max.y() : min.y(),
                            (i & 4) ? max.z() : min.z());
  }
  m.triangles = {{0, 2, 1}, {1, 2, 3},   // z = min
                 {4, 5, 6}, {5, 7, 6},   // z = max
                 {0, 1, 4}, {1, 5, 4},   // y = min
                 {2, 6, 3}, {3, 6, 7},   // y = max
                 {0, 4, 2}, {2, 4, 6},   // x = min
                 {1, 3, 5}, {3, 7, 5}};  // x = max
  return m;
}

TriMesh make_icosphere(double radius, int subdivisions, const Vec3& center) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> v = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0},
                         {0, -1, t}, {0, 1, t}, {0, -1, -t}, {0, 1, -t},
                         {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  for (auto& p : v) p.normalize();
  std::vector<Triangle> f = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                             {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                             {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                             {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::pair<int, int>, int> mid;
    auto midpoint = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      auto it = mid.find(key);
      if (it != mid.end()) return it->second;
      v.push_back((v[a] + v[b]).normalized());
      const int idx = static_cast<int>(v.size()) - 1;
      mid.emplace(key, idx);
      return idx;
    };
    std::vector<Triangle> next;
    next.reserve(f.size() * 4);
    for (const auto& tri : f) {
      const int ab = midpoint(tri[0], tri[1]);
      const int bc = midpoint(tri[1], tri[2]);
      const int ca = midpoint(tri[2], tri[0]);
      next.push_back({tri[0], ab, ca});
      next.push_back({tri[1], bc, ab});
      next.push_back({tri[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    f = std::move(next);
  }
  for (auto& p : v) p = center + radius * p;
  return {std::move(v), std::move(f)};
}

TriMesh make_prism(int sides, double radius, double height, const Vec3& center) {
  TriMesh m;
  const double h = 0.5 * height;
  for (int i = 0; i < sides; ++i) {
    const double a = 2.0 * kPi * i / sides;
    m.vertices.push_back(center + Vec3(radius * std::cos(a), radius * std::sin(a), -h));
  }
  for (int i = 0; i < sides; ++i) {
    const double a = 2.0 * kPi * i / sides;
    m.vertices.push_back(center + Vec3(radius * std::cos(a), radius * std::sin(a), h));
  }
  const int bottom = static_cast<int>(m.vertices.size());
  m.vertices.push_back(center + Vec3(0, 0, -h));
  const int top = bottom + 1;
  m.vertices.push_back(center + Vec3(0, 0, h));
  for (int i = 0; i < sides; ++i) {
    const int j = (i + 1) % sides;
    m.triangles.push_back({i, j, sides + j});
    m.triangles.push_back({i, sides + j, sides + i});
    m.triangles.push_back({bottom, j, i});
    m.triangles.push_back({top, sides + i, sides + j});
  }
  return m;
}

}  // namespace dpack
