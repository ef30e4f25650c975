#include "mlh/mesh.hpp"

#include <cmath>

#include "mlh/errors.hpp"

namespace mlh {

void validate_mesh(const TriangleMesh& mesh) {
  for (const Vec3& v : mesh.vertices) {
    if (!std::isfinite(v.x) || !std::isfinite(v.y) || !std::isfinite(v.z)) {
      throw InvalidParams("mesh vertex has non-finite coordinate");
    }
  }
  const std::uint32_t nv = static_cast<std::uint32_t>(mesh.vertices.size());
  for (const auto& f : mesh.faces) {
    for (std::uint32_t idx : f) {
      if (idx >= nv) {
        throw IndexOutOfRange("face references vertex " + std::to_string(idx) + " of " +
                              std::to_string(nv));
      }
    }
  }
}

double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) {
  return 0.5 * norm(cross(b - a, c - a));
}

double surface_area(const TriangleMesh& mesh) {
  double area = 0.0;
  for (const auto& f : mesh.faces) {
    area += triangle_area(mesh.vertices[f[0]], mesh.vertices[f[1]], mesh.vertices[f[2]]);
  }
  return area;
}

Aabb bounding_box(const TriangleMesh& mesh) {
  Aabb box = Aabb::empty();
  for (const Vec3& v : mesh.vertices) box.expand(v);
  return box;
}

}  // namespace mlh
