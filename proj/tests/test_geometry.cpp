#include "doctest.h"

#include <random>

#include "dpack/geometry.hpp"
#include "dpack/primitives.hpp"
#include "oracles.hpp"

using namespace dpack;

namespace {

std::vector<Vec3> cube_corners(const Vec3& lo, const Vec3& hi) {
  std::vector<Vec3> out;
  for (int i = 0; i < 8; ++i)
    out.emplace_back(i & 1 ? hi.x() : lo.x(), i & 2 ? hi.y() : lo.y(), i & 4 ? hi.z() : lo.z());
  return out;
}

Quat random_rotation(std::mt19937& rng) {
  std::normal_distribution<double> n;
  return Quat(n(rng), n(rng), n(rng), n(rng)).normalized();
}

}  // namespace

TEST_SUITE("geometry") {

TEST_CASE("transform composition and inverse") {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int i = 0; i < 20; ++i) {
    const RigidTransform a(random_rotation(rng), Vec3(u(rng), u(rng), u(rng)));
    const RigidTransform b(random_rotation(rng), Vec3(u(rng), u(rng), u(rng)));
    const Vec3 p(u(rng), u(rng), u(rng));
    CHECK(((a * b) * p - a * (b * p)).norm() < 1e-12);
    CHECK((a.inverse() * (a * p) - p).norm() < 1e-12);
    CHECK((a * a.inverse()).is_approx(RigidTransform::identity(), 1e-12));
    CHECK((oracle::to_matrix(a * b) - oracle::to_matrix(a) * oracle::to_matrix(b)).norm() < 1e-12);
  }
}

TEST_CASE("rotation about an offset axis keeps the anchor") {
  const Vec3 anchor(1, 2, 3);
  const auto t = RigidTransform::about_axis(anchor, Vec3(0, 0, 2), kPi / 2);
  CHECK((t * anchor - anchor).norm() < 1e-12);
  CHECK((t * Vec3(2, 2, 3) - Vec3(1, 3, 3)).norm() < 1e-12);
  CHECK((t.matrix() - oracle::rotation_about(anchor, Vec3::UnitZ(), kPi / 2)).norm() < 1e-12);
}

TEST_CASE("validated mesh reports bad indices and slivers") {
  CHECK_THROWS_AS(TriMesh::validated({Vec3::Zero(), Vec3::UnitX(), Vec3::UnitY()}, {{0, 1, 3}}),
                  InvalidInput);
  CHECK_THROWS_AS(TriMesh::validated({Vec3::Zero(), Vec3::UnitX(), Vec3::UnitY()}, {{0, 1, 1}}),
                  InvalidInput);
  CHECK_THROWS_AS(TriMesh::validated({Vec3::Zero(), Vec3::UnitX(), Vec3(2, 0, 0)}, {{0, 1, 2}}),
                  InvalidInput);
  CHECK_NOTHROW(TriMesh::validated({Vec3::Zero(), Vec3::UnitX(), Vec3::UnitY()}, {{0, 1, 2}}));
}

TEST_CASE("box volume and manifold checks") {
  const auto box = make_box(Vec3(0, 0, 0), Vec3(1, 2, 3));
  CHECK(is_closed_manifold(box));
  CHECK(mesh_volume(box) == doctest::Approx(6.0).epsilon(1e-12));
  CHECK(surface_area(box) == doctest::Approx(22.0).epsilon(1e-12));

  auto open = box;
  open.triangles.pop_back();
  CHECK_FALSE(is_closed_manifold(open));
  CHECK_THROWS_AS(mesh_volume(open), NotWatertight);

  auto flipped = box;
  std::swap(flipped.triangles[0][1], flipped.triangles[0][2]);
  CHECK_FALSE(is_closed_manifold(flipped));
}

TEST_CASE("volume is invariant under rigid motion") {
  const auto s = make_icosphere(0.7, 2, Vec3(0.1, 0.2, 0.3));
  const double v = mesh_volume(s);
  std::mt19937 rng(9);
  for (int i = 0; i < 5; ++i) {
    const RigidTransform t(random_rotation(rng), Vec3(i, -i, 2.0 * i));
    CHECK(mesh_volume(transform_mesh(s, t)) == doctest::Approx(v).epsilon(1e-10));
  }
}

TEST_CASE("icosphere volume approaches the sphere") {
  const auto s = make_icosphere(1.0, 4);
  const double v = mesh_volume(s);
  CHECK(std::abs(v - 4.0 / 3.0 * kPi) / (4.0 / 3.0 * kPi) < 0.005);
  CHECK(v == doctest::Approx(oracle::column_clip_volume(s, 0.01)).epsilon(0.01));
}

TEST_CASE("column clip oracle agrees on a prism") {
  const auto p = make_prism(7, 0.5, 0.4, Vec3(1, 1, 1));
  CHECK(mesh_volume(p) == doctest::Approx(oracle::column_clip_volume(p, 0.005)).epsilon(0.01));
}

TEST_CASE("convex hull of a cube with interior points") {
  auto pts = cube_corners(Vec3::Zero(), Vec3::Ones());
  pts.emplace_back(0.5, 0.5, 0.5);
  pts.emplace_back(0.2, 0.7, 0.1);
  pts.emplace_back(0.5, 0.5, 1.0);  // on a face
  const auto hull = convex_hull(pts);
  CHECK(hull.vertices.size() == 8);
  CHECK(hull.triangles.size() == 12);
  CHECK(is_closed_manifold(hull));
  CHECK(mesh_volume(hull) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("convex hull rejects degenerate sets") {
  CHECK_THROWS_AS(convex_hull(std::vector<Vec3>{Vec3::Zero(), Vec3::UnitX(), Vec3::UnitY()}),
                  DegenerateInput);
  CHECK_THROWS_AS(convex_hull(std::vector<Vec3>{Vec3::Zero(), Vec3::UnitX(), Vec3::UnitY(),
                                                Vec3(1, 1, 0)}),
                  DegenerateInput);
}

TEST_CASE("hull contains every input point") {
  std::mt19937 rng(3);
  std::normal_distribution<double> n;
  std::vector<Vec3> pts;
  for (int i = 0; i < 200; ++i) pts.emplace_back(n(rng), 0.5 * n(rng), 2 * n(rng));
  const auto hull = convex_hull(pts);
  CHECK(is_closed_manifold(hull));
  for (const auto& t : hull.triangles) {
    const Vec3 a = hull.vertices[t[0]];
    const Vec3 nrm = (hull.vertices[t[1]] - a).cross(hull.vertices[t[2]] - a);
    for (const auto& p : pts) CHECK(nrm.dot(p - a) <= 1e-9 * nrm.norm());
  }
}

TEST_CASE("min obb of a unit cube") {
  const auto obb = min_obb(cube_corners(Vec3::Zero(), Vec3::Ones()));
  CHECK(obb.volume() == doctest::Approx(1.0).epsilon(1e-6));
  CHECK((obb.center - Vec3::Constant(0.5)).norm() < 1e-9);
}

TEST_CASE("min obb of rotated boxes") {
  std::mt19937 rng(17);
  for (int i = 0; i < 5; ++i) {
    const RigidTransform t(random_rotation(rng), Vec3(1, -2, 3));
    std::vector<Vec3> pts;
    transform_points(cube_corners(Vec3::Zero(), Vec3::Ones()), t, pts);
    CHECK(min_obb(pts).volume() <= 1.02);

    transform_points(cube_corners(Vec3::Zero(), Vec3(2, 1, 1)), t, pts);
    const auto obb = min_obb(pts);
    Vec3 h = obb.half_extents;
    std::sort(h.data(), h.data() + 3);
    CHECK(h.x() == doctest::Approx(0.5).epsilon(0.02));
    CHECK(h.y() == doctest::Approx(0.5).epsilon(0.02));
    CHECK(h.z() == doctest::Approx(1.0).epsilon(0.02));
  }
}

TEST_CASE("min obb contains its points and beats the aabb") {
  std::mt19937 rng(11);
  std::normal_distribution<double> n;
  for (int k = 0; k < 5; ++k) {
    std::vector<Vec3> pts;
    for (int i = 0; i < 100; ++i) pts.emplace_back(n(rng), 0.3 * n(rng), 0.1 * n(rng));
    const RigidTransform t(random_rotation(rng), Vec3::Zero());
    std::vector<Vec3> moved;
    transform_points(pts, t, moved);
    const auto obb = min_obb(moved);
    for (const auto& p : moved) CHECK(obb.contains(p, 1e-7));
    CHECK(obb.volume() <= bounding_box(moved).volume() + 1e-12);
    CHECK(std::abs(obb.axes().determinant() - 1.0) < 1e-9);
  }
}

TEST_CASE("min obb rejects collinear points") {
  CHECK_THROWS_AS(min_obb(std::vector<Vec3>{Vec3::Zero(), Vec3::UnitX(), Vec3(2, 0, 0)}),
                  DegenerateInput);
}

TEST_CASE("flat point sets get the half extent floor") {
  const std::vector<Vec3> square{Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(1, 1, 0)};
  const auto obb = min_obb(square);
  CHECK(obb.half_extents.minCoeff() == doctest::Approx(1e-9));
  CHECK(obb.half_extents.maxCoeff() == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("search size grows as the step shrinks") {
  CHECK(obb_search_size(deg_to_rad(3.0)) > obb_search_size(deg_to_rad(6.0)));
  CHECK(obb_search_size(deg_to_rad(6.0)) > 1000);
}

TEST_CASE("voxelizing a box aligned with cells") {
  const auto box = make_box(Vec3::Zero(), Vec3::Ones());
  const auto g = voxelize(box, Vec3::Zero(), 0.1, Vec3i(12, 12, 12));
  CHECK(g.count() == 1000);
  CHECK(g.at(9, 9, 9));
  CHECK_FALSE(g.at(10, 0, 0));
}

TEST_CASE("voxelizing an octant of a larger box") {
  const auto box = make_box(Vec3::Zero(), Vec3::Ones());
  const auto g = voxelize(box, Vec3::Constant(0.5), 0.25, Vec3i(4, 4, 4));
  CHECK(g.count() == 8);
}

TEST_CASE("sphere voxelization is conservative") {
  const auto s = make_icosphere(0.5, 3, Vec3::Constant(0.5));
  const auto g = voxelize(s, Vec3::Zero(), 0.05, Vec3i(20, 20, 20));
  CHECK(g.occupied_volume() >= mesh_volume(s));
  std::mt19937 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    const Vec3 p(u(rng), u(rng), u(rng));
    if (!point_inside(s, p)) continue;
    const Vec3i c = (p / 0.05).cast<int>();
    CHECK(g.at(c.x(), c.y(), c.z()));
  }
}

TEST_CASE("voxel grid growth keeps cells") {
  VoxelGrid g(Vec3::Zero(), 1.0, Vec3i(2, 2, 1));
  g.set(1, 1, 0);
  g.grow_z(3);
  CHECK(g.dims().z() == 3);
  CHECK(g.at(1, 1, 0));
  CHECK(g.count() == 1);
}

TEST_CASE("touching boxes do not intersect") {
  const auto a = make_box(Vec3::Zero(), Vec3::Ones());
  CHECK_FALSE(meshes_intersect(a, make_box(Vec3(1, 0, 0), Vec3(2, 1, 1))));
  CHECK_FALSE(meshes_intersect(a, make_box(Vec3(1, 1, 1), Vec3(2, 2, 2))));
  CHECK_FALSE(meshes_intersect(a, make_box(Vec3(0.2, 0.2, 1), Vec3(0.5, 0.5, 2))));
  CHECK_FALSE(meshes_intersect(a, make_box(Vec3(3, 0, 0), Vec3(4, 1, 1))));
}

TEST_CASE("overlapping and nested boxes intersect") {
  const auto a = make_box(Vec3::Zero(), Vec3::Ones());
  CHECK(meshes_intersect(a, make_box(Vec3(0.5, 0.5, 0.5), Vec3(2, 2, 2))));
  CHECK(meshes_intersect(a, a));
  CHECK(meshes_intersect(a, make_box(Vec3::Constant(0.25), Vec3::Constant(0.75))));
  CHECK(meshes_intersect(a, make_box(Vec3(1 - 1e-5, 0, 0), Vec3(2, 1, 1))));
}

TEST_CASE("intersection is symmetric") {
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const auto a = make_icosphere(0.5, 1);
  for (int i = 0; i < 20; ++i) {
    const auto b = transform_mesh(make_box(Vec3::Zero(), Vec3(0.6, 0.4, 0.3)),
                                  RigidTransform(random_rotation(rng), Vec3(u(rng), u(rng), u(rng))));
    CHECK(meshes_intersect(a, b) == meshes_intersect(b, a));
  }
}

TEST_CASE("penetration shallower than eps counts as contact") {
  const auto a = make_box(Vec3::Zero(), Vec3::Ones());
  const auto b = make_box(Vec3(1 - 1e-7, 0, 0), Vec3(2, 1, 1));
  CHECK_FALSE(meshes_intersect(a, b, 1e-6));
}

}  // TEST_SUITE
