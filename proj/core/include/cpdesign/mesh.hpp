#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "cpdesign/levelset.hpp"

namespace cpd {

/// Zero contour of a level set: line segments in 2D, triangles in 3D.
struct ContourMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 2>> segments;
  std::vector<std::array<int, 3>> triangles;
};

/// Marching squares (2D) or marching tetrahedra (3D). Triangles face the Phi > 0 side.
/// Throws ConfigError when the field has no interior.
ContourMesh extract_contour(const LevelSetField& field);

/// V - E + F of a triangle mesh (2 for a sphere, 0 for a torus).
int euler_characteristic(const ContourMesh& mesh);

/// True if every triangle edge is shared by exactly two triangles (or every polyline vertex by two segments).
bool is_closed(const ContourMesh& mesh);

/// Wavefront OBJ; `comments` are written as leading '#' lines.
void write_obj(std::ostream& out, const ContourMesh& mesh, const std::vector<std::string>& comments = {});

}  // namespace cpd
