#include "doctest.h"

#include <sstream>

#include "dpack/mesh_io.hpp"
#include "dpack/primitives.hpp"

using namespace dpack;

TEST_SUITE("mesh_io") {

TEST_CASE("quads are split and slashes ignored") {
  std::istringstream in(
      "# unit square as a quad\n"
      "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\n"
      "vn 0 0 1\n"
      "f 1/1/1 2/2/1 3/3/1 4/4/1\n");
  const auto m = read_obj(in);
  CHECK(m.vertices.size() == 4);
  CHECK(m.triangles.size() == 2);
}

TEST_CASE("negative indices count back from the last vertex") {
  std::istringstream in("v 0 0 0\nv 1 0 0\nv 0 1 0\nf -3 -2 -1\n");
  const auto m = read_obj(in);
  REQUIRE(m.triangles.size() == 1);
  CHECK(m.triangles[0] == Triangle{0, 1, 2});
}

TEST_CASE("malformed files are rejected") {
  auto fails = [](const std::string& text) {
    std::istringstream in(text);
    CHECK_THROWS_AS(read_obj(in), InvalidInput);
  };
  fails("");
  fails("v 0 0 0\nv 1 0 0\nv 0 1 0\n");
  fails("v 0 0\n");
  fails("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 4\n");
  fails("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2\n");
  fails("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 x 3\n");
  fails("v 0 0 0\nv 1 0 0\nv 2 0 0\nf 1 2 3\n");
  CHECK_THROWS_AS(read_obj(std::filesystem::path("/nonexistent/mesh.obj")), InvalidInput);
}

TEST_CASE("write then read reproduces the mesh") {
  const auto box = make_box(Vec3(-0.1, 0.2, 0.3), Vec3(1.7, 2.25, 3.125));
  std::stringstream io;
  write_obj(io, box);
  const auto back = read_obj(io);
  REQUIRE(back.vertices.size() == box.vertices.size());
  CHECK(back.triangles == box.triangles);
  for (std::size_t i = 0; i < box.vertices.size(); ++i)
    CHECK((back.vertices[i] - box.vertices[i]).norm() < 1e-12);
}

TEST_CASE("scene output names each object") {
  const auto box = make_box(Vec3::Zero(), Vec3::Ones());
  const std::vector<NamedMesh> objects{{"g0_a", box}, {"g1_b", box}};
  std::ostringstream out;
  write_obj_scene(out, objects);
  const std::string s = out.str();
  CHECK(s.find("o g0_a") != std::string::npos);
  CHECK(s.find("o g1_b") != std::string::npos);
  std::istringstream in(s);
  CHECK(read_obj(in).triangles.size() == 24);
}

}  // TEST_SUITE
