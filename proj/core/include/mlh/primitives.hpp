#pragma once

#include <cstdint>
#include <string>

#include "mlh/mesh.hpp"

namespace mlh {

enum class PrimitiveKind { Box, Sphere, Cylinder, Cone };

const char* to_string(PrimitiveKind kind);

struct PrimitiveParams {
  Vec3 extents{1.0, 1.0, 1.0};  // box edge lengths
  double radius = 0.5;          // sphere / cylinder / cone
  double height = 1.0;          // cylinder / cone (base at z=0, +Z axis)
  int subdivisions = 3;         // icosphere refinement level
  int segments = 32;            // radial segments for cylinder / cone
  double jitter = 0.0;          // per-vertex displacement amplitude, model units
};

/// Watertight triangle mesh, bitwise deterministic for fixed (kind, params,
/// seed). The seed only matters when params.jitter > 0: jitter displaces
/// shared vertices, so watertightness is preserved.
///
/// Throws InvalidParams for non-positive dimensions, segments < 3,
/// subdivisions < 0 or negative jitter.
TriangleMesh generate_primitive(PrimitiveKind kind, const PrimitiveParams& params,
                                std::uint64_t seed);

}  // namespace mlh
