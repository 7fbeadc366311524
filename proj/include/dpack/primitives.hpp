#pragma once

#include "dpack/geometry.hpp"

namespace dpack {

/// Closed, outward-wound box [min, max] (12 triangles).
TriMesh make_box(const Vec3& min, const Vec3& max);

/// Icosahedron subdivided `subdivisions` times and projected to the sphere.
TriMesh make_icosphere(double radius, int subdivisions, const Vec3& center = Vec3::Zero());

/// Regular n-gon prism along z, centered at `center`.
TriMesh make_prism(int sides, double radius, double height, const Vec3& center = Vec3::Zero());

}  // namespace dpack
