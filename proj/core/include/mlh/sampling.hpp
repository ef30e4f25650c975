#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "mlh/mesh.hpp"

namespace mlh {

/// Dense surface samples, same units as the source mesh.
struct PointCloud {
  std::vector<Vec3> points;

  bool operator==(const PointCloud& o) const = default;
};

struct SamplingConfig {
  double oversample_factor = 8.0;  // expected points per occupied descriptor bin, per layer
  std::uint64_t rng_seed = 0;
};

/// Sample budget for an N x N grid with k layers: ceil(c * k * N^2), floored
/// at 1024. Keeps the expected count in an occupied bin at c * k or better
/// for a surface spanning the grid.
std::size_t required_point_count(std::uint32_t grid_resolution, std::uint32_t layers,
                                 const SamplingConfig& config);

/// Area-weighted uniform surface sampling. Triangle choice uses a cumulative
/// area table with binary search; the position inside the chosen triangle is
/// p = (1-sqrt(r1))A + sqrt(r1)(1-r2)B + sqrt(r1) r2 C. Per-point randomness
/// is counter-based, so the result is bitwise identical for a fixed (mesh, n,
/// seed) regardless of how generation is chunked.
///
/// Throws ZeroAreaMesh when the total surface area is zero.
PointCloud sample_surface(const TriangleMesh& mesh, std::size_t n, std::uint64_t seed);

/// Debug export, one "x y z" per line with 9 significant digits.
void write_xyz(const PointCloud& cloud, const std::filesystem::path& path);

}  // namespace mlh
