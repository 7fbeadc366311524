#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>

#include "dpack/geometry.hpp"

namespace dpack {

/// Reads `v` and `f` records; polygons are fan-triangulated and negative
/// indices resolve relative to the vertices read so far. Everything else is
/// ignored. Throws InvalidInput on malformed records, empty input or a mesh
/// that fails TriMesh validation.
TriMesh read_obj(std::istream& in, const std::string& source = "<stream>");
TriMesh read_obj(const std::filesystem::path& path);

/// Writes vertices with 9 significant digits.
void write_obj(std::ostream& out, const TriMesh& mesh);
void write_obj(const std::filesystem::path& path, const TriMesh& mesh);

/// Several meshes as named `o` objects in one file.
struct NamedMesh {
  std::string name;
  TriMesh mesh;
};
void write_obj_scene(std::ostream& out, std::span<const NamedMesh> objects);

/// Wireframe of an axis-aligned box as `v`/`l` records.
void write_box_wireframe(std::ostream& out, const Vec3& min, const Vec3& max);

}  // namespace dpack
