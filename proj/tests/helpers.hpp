#pragma once

#include <string>

#include "mlh/mesh_io.hpp"
#include "mlh/rng.hpp"
#include "mlh/sampling.hpp"

namespace mlh::testing {

/// Canonical unit cube: 8 vertices, 12 triangles, [0,1]^3.
inline std::string cube_off_text() {
  return "OFF\n"
         "8 12 0\n"
         "0 0 0\n"
         "1 0 0\n"
         "1 1 0\n"
         "0 1 0\n"
         "0 0 1\n"
         "1 0 1\n"
         "1 1 1\n"
         "0 1 1\n"
         "3 0 3 2\n"
         "3 0 2 1\n"
         "3 4 5 6\n"
         "3 4 6 7\n"
         "3 0 1 5\n"
         "3 0 5 4\n"
         "3 2 3 7\n"
         "3 2 7 6\n"
         "3 1 2 6\n"
         "3 1 6 5\n"
         "3 3 0 4\n"
         "3 3 4 7\n";
}

inline TriangleMesh cube_mesh() { return parse_off(cube_off_text()); }

/// Random cloud already inside the unit cube, with a mix of spreads so thin
/// and clustered bins both show up.
inline PointCloud random_unit_cloud(Rng& rng, std::size_t max_points = 400) {
  PointCloud cloud;
  const std::size_t count = 1 + rng.below(max_points);
  const int style = static_cast<int>(rng.below(3));
  for (std::size_t i = 0; i < count; ++i) {
    Vec3 p{rng.uniform01(), rng.uniform01(), rng.uniform01()};
    if (style == 1) {
      p.z = rng.below(2) ? 0.1 * p.z : 1.0 - 0.1 * p.z;  // bimodal heights
    } else if (style == 2) {
      p.x = 0.25 + 0.5 * p.x * p.x;  // clustered in x
    }
    cloud.points.push_back(p);
  }
  return cloud;
}

}  // namespace mlh::testing
