#include "mlh/primitives.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <utility>

#include "mlh/errors.hpp"
#include "mlh/rng.hpp"

namespace mlh {

namespace {

TriangleMesh make_box(const Vec3& extents) {
  const double hx = extents.x / 2.0, hy = extents.y / 2.0, hz = extents.z / 2.0;
  TriangleMesh mesh;
  mesh.vertices = {{-hx, -hy, -hz}, {hx, -hy, -hz}, {hx, hy, -hz}, {-hx, hy, -hz},
                   {-hx, -hy, hz},  {hx, -hy, hz},  {hx, hy, hz},  {-hx, hy, hz}};
  // Outward-facing quads, fan split.
  const std::uint32_t quads[6][4] = {
      {0, 3, 2, 1},  // bottom (-z)
      {4, 5, 6, 7},  // top (+z)
      {0, 1, 5, 4},  // -y
      {2, 3, 7, 6},  // +y
      {1, 2, 6, 5},  // +x
      {3, 0, 4, 7},  // -x
  };
  for (const auto& q : quads) {
    mesh.faces.push_back({q[0], q[1], q[2]});
    mesh.faces.push_back({q[0], q[2], q[3]});
  }
  return mesh;
}

TriangleMesh make_icosphere(double radius, int subdivisions) {
  // Icosahedron, then midpoint subdivision with shared-vertex dedup, then
  // projection onto the sphere.
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  TriangleMesh mesh;
  mesh.vertices = {{-1, t, 0}, {1, t, 0},   {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                   {0, -1, -t}, {0, 1, -t}, {t, 0, -1},  {t, 0, 1},  {-t, 0, -1}, {-t, 0, 1}};
  mesh.faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};

  for (int level = 0; level < subdivisions; ++level) {
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> midpoints;
    auto midpoint = [&](std::uint32_t a, std::uint32_t b) -> std::uint32_t {
      auto key = std::minmax(a, b);
      auto it = midpoints.find(key);
      if (it != midpoints.end()) return it->second;
      const Vec3 m = (mesh.vertices[a] + mesh.vertices[b]) * 0.5;
      const std::uint32_t idx = static_cast<std::uint32_t>(mesh.vertices.size());
      mesh.vertices.push_back(m);
      midpoints.emplace(key, idx);
      return idx;
    };
    std::vector<std::array<std::uint32_t, 3>> refined;
    refined.reserve(mesh.faces.size() * 4);
    for (const auto& f : mesh.faces) {
      const std::uint32_t ab = midpoint(f[0], f[1]);
      const std::uint32_t bc = midpoint(f[1], f[2]);
      const std::uint32_t ca = midpoint(f[2], f[0]);
      refined.push_back({f[0], ab, ca});
      refined.push_back({f[1], bc, ab});
      refined.push_back({f[2], ca, bc});
      refined.push_back({ab, bc, ca});
    }
    mesh.faces = std::move(refined);
  }

  for (Vec3& v : mesh.vertices) {
    const double len = norm(v);
    v = v * (radius / len);
  }
  return mesh;
}

TriangleMesh make_cylinder(double radius, double height, int segments) {
  TriangleMesh mesh;
  const auto s = static_cast<std::uint32_t>(segments);
  // Bottom ring [0, s), top ring [s, 2s), bottom center 2s, top center 2s+1.
  for (int ring = 0; ring < 2; ++ring) {
    const double z = ring == 0 ? 0.0 : height;
    for (int i = 0; i < segments; ++i) {
      const double a = 2.0 * std::numbers::pi * i / segments;
      mesh.vertices.push_back({radius * std::cos(a), radius * std::sin(a), z});
    }
  }
  mesh.vertices.push_back({0.0, 0.0, 0.0});
  mesh.vertices.push_back({0.0, 0.0, height});
  const std::uint32_t bc = 2 * s, tc = 2 * s + 1;
  for (std::uint32_t i = 0; i < s; ++i) {
    const std::uint32_t j = (i + 1) % s;
    mesh.faces.push_back({i, j, s + j});        // wall
    mesh.faces.push_back({i, s + j, s + i});
    mesh.faces.push_back({bc, j, i});           // bottom cap faces -z
    mesh.faces.push_back({tc, s + i, s + j});   // top cap faces +z
  }
  return mesh;
}

TriangleMesh make_cone(double radius, double height, int segments) {
  TriangleMesh mesh;
  const auto s = static_cast<std::uint32_t>(segments);
  for (int i = 0; i < segments; ++i) {
    const double a = 2.0 * std::numbers::pi * i / segments;
    mesh.vertices.push_back({radius * std::cos(a), radius * std::sin(a), 0.0});
  }
  mesh.vertices.push_back({0.0, 0.0, 0.0});     // base center s
  mesh.vertices.push_back({0.0, 0.0, height});  // apex s+1
  const std::uint32_t bc = s, apex = s + 1;
  for (std::uint32_t i = 0; i < s; ++i) {
    const std::uint32_t j = (i + 1) % s;
    mesh.faces.push_back({bc, j, i});       // base
    mesh.faces.push_back({apex, i, j});     // side
  }
  return mesh;
}

}  // namespace

const char* to_string(PrimitiveKind kind) {
  switch (kind) {
    case PrimitiveKind::Box: return "box";
    case PrimitiveKind::Sphere: return "sphere";
    case PrimitiveKind::Cylinder: return "cylinder";
    case PrimitiveKind::Cone: return "cone";
  }
  return "?";
}

TriangleMesh generate_primitive(PrimitiveKind kind, const PrimitiveParams& params,
                                std::uint64_t seed) {
  if (params.jitter < 0.0) throw InvalidParams("jitter must be non-negative");

  TriangleMesh mesh;
  switch (kind) {
    case PrimitiveKind::Box:
      if (params.extents.x <= 0 || params.extents.y <= 0 || params.extents.z <= 0) {
        throw InvalidParams("box extents must be positive");
      }
      mesh = make_box(params.extents);
      break;
    case PrimitiveKind::Sphere:
      if (params.radius <= 0) throw InvalidParams("sphere radius must be positive");
      if (params.subdivisions < 0 || params.subdivisions > 7) {
        throw InvalidParams("sphere subdivisions must be in [0, 7]");
      }
      mesh = make_icosphere(params.radius, params.subdivisions);
      break;
    case PrimitiveKind::Cylinder:
      if (params.radius <= 0 || params.height <= 0) {
        throw InvalidParams("cylinder radius and height must be positive");
      }
      if (params.segments < 3) throw InvalidParams("cylinder needs at least 3 segments");
      mesh = make_cylinder(params.radius, params.height, params.segments);
      break;
    case PrimitiveKind::Cone:
      if (params.radius <= 0 || params.height <= 0) {
        throw InvalidParams("cone radius and height must be positive");
      }
      if (params.segments < 3) throw InvalidParams("cone needs at least 3 segments");
      mesh = make_cone(params.radius, params.height, params.segments);
      break;
  }

  if (params.jitter > 0.0) {
    for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
      Rng rng = Rng::at(seed, i);
      Vec3& v = mesh.vertices[i];
      v.x += rng.uniform(-params.jitter, params.jitter);
      v.y += rng.uniform(-params.jitter, params.jitter);
      v.z += rng.uniform(-params.jitter, params.jitter);
    }
  }
  return mesh;
}

}  // namespace mlh
