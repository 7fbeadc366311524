#include "dpack/mesh_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace dpack {
namespace {

std::string fmt9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  // Avoid "-0" so output does not depend on the sign of zero.
  if (std::string(buf) == "-0") return "0";
  return buf;
}

void write_vertex(std::ostream& out, const Vec3& p) {
  out << "v " << fmt9(p.x()) << ' ' << fmt9(p.y()) << ' ' << fmt9(p.z()) << '\n';
}

int resolve_index(const std::string& token, int vertex_count, const std::string& where) {
  // "7", "7/2", "7//3", "-1/..."
  const std::string head = token.substr(0, token.find('/'));
  int idx = 0;
  std::size_t used = 0;
  try {
    idx = std::stoi(head, &used);
  } catch (const std::exception&) {
    throw InvalidInput(where + ": bad face index '" + token + "'");
  }
  if (used != head.size() || idx == 0) {
    throw InvalidInput(where + ": bad face index '" + token + "'");
  }
  const int resolved = idx > 0 ? idx - 1 : vertex_count + idx;
  if (resolved < 0 || resolved >= vertex_count) {
    throw InvalidInput(where + ": face index " + token + " out of range");
  }
  return resolved;
}

}  // namespace

TriMesh read_obj(std::istream& in, const std::string& source) {
  std::vector<Vec3> vertices;
  std::vector<Triangle> triangles;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag)) continue;
    const std::string where = source + ":" + std::to_string(line_no);
    if (tag == "v") {
      double x, y, z;
      if (!(ls >> x >> y >> z)) throw InvalidInput(where + ": malformed vertex");
      vertices.emplace_back(x, y, z);
    } else if (tag == "f") {
      std::vector<int> poly;
      std::string tok;
      const int n = static_cast<int>(vertices.size());
      while (ls >> tok) poly.push_back(resolve_index(tok, n, where));
      if (poly.size() < 3) throw InvalidInput(where + ": face with fewer than 3 vertices");
      for (std::size_t k = 1; k + 1 < poly.size(); ++k) {
        triangles.push_back({poly[0], poly[k], poly[k + 1]});
      }
    }
  }
  if (triangles.empty()) throw InvalidInput(source + ": no faces");
  try {
    return TriMesh::validated(std::move(vertices), std::move(triangles));
  } catch (const InvalidInput& e) {
    throw InvalidInput(source + ": " + e.what());
  }
}

TriMesh read_obj(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open " + path.string());
  return read_obj(in, path.string());
}

void write_obj(std::ostream& out, const TriMesh& mesh) {
  for (const auto& v : mesh.vertices) write_vertex(out, v);
  for (const auto& t : mesh.triangles) {
    out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
  }
}

void write_obj(const std::filesystem::path& path, const TriMesh& mesh) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write " + path.string());
  write_obj(out, mesh);
}

void write_obj_scene(std::ostream& out, std::span<const NamedMesh> objects) {
  std::size_t base = 1;
  for (const auto& obj : objects) {
    out << "o " << obj.name << '\n';
    for (const auto& v : obj.mesh.vertices) write_vertex(out, v);
    for (const auto& t : obj.mesh.triangles) {
      out << "f " << t[0] + base << ' ' << t[1] + base << ' ' << t[2] + base << '\n';
    }
    base += obj.mesh.vertices.size();
  }
}

void write_box_wireframe(std::ostream& out, const Vec3& min, const Vec3& max) {
  for (int i = 0; i < 8; ++i) {
    write_vertex(out, Vec3((i & 1) ? max.x() : min.x(), (i & 2) ? max.y() : min.y(),
                           (i & 4) ? max.z() : min.z()));
  }
  // Corner i and i ^ bit differ along one axis.
  for (int i = 0; i < 8; ++i) {
    for (int bit : {1, 2, 4}) {
      if (!(i & bit)) out << "l " << i + 1 << ' ' << (i | bit) + 1 << '\n';
    }
  }
}

}  // namespace dpack
