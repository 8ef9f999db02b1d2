#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "mvtrack/geometry.hpp"

namespace mvtrack {

/// Triangle mesh in template coordinates (mm). Closedness is not enforced;
/// only silhouettes and vertex sets are consumed downstream.
struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> faces;

  /// Throws InvalidArgument on out-of-range indices or fewer than 4
  /// vertices/faces.
  void validate() const;

  Vec3 bbox_min() const;
  Vec3 bbox_max() const;
  /// Center of the axis-aligned bounding box: origin of the object-centered frame.
  Vec3 center() const;
  /// Longest side of the axis-aligned bounding box (the ADD "d").
  double bbox_longest_side() const;
};

/// ASCII OBJ: `v x y z` and `f a b c ...` records (polygons are fan
/// triangulated, `a/b/c` index forms accepted); everything else ignored.
TriangleMesh load_obj(const std::filesystem::path& path);
void save_obj(const TriangleMesh& mesh, const std::filesystem::path& path);

namespace meshes {

TriangleMesh cube(double side);
TriangleMesh icosphere(double radius, int subdivisions);

// Procedural stand-ins for the evaluation objects, 90-230 mm longest side.
TriangleMesh sphere_with_bumps();
TriangleMesh box_with_notch();
TriangleMesh l_bracket();
TriangleMesh torus_knot();

/// Names accepted by `by_name`.
const std::vector<std::string>& builtin_names();
TriangleMesh by_name(const std::string& name);

}  // namespace meshes

/// Resolves "builtin:<name>" or an OBJ path.
TriangleMesh load_mesh(const std::string& ref);

}  // namespace mvtrack
