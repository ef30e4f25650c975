#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "mlh/geometry.hpp"

namespace mlh {

/// Indexed triangle soup in model units. Immutable after construction by
/// convention; all operations on it are pure.
struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<std::uint32_t, 3>> faces;

  bool operator==(const TriangleMesh& o) const = default;
};

struct LabeledShape {
  TriangleMesh mesh;
  std::uint32_t label = 0;
  std::string id;
};

/// Throws if any face index is out of range or a coordinate is non-finite.
void validate_mesh(const TriangleMesh& mesh);

double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c);

/// Sum of per-triangle areas (cross-product formula).
double surface_area(const TriangleMesh& mesh);

Aabb bounding_box(const TriangleMesh& mesh);

}  // namespace mlh
