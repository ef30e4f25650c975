#pragma once

#include <cstdint>
#include <vector>

#include "mlh/descriptor.hpp"

namespace mlh {

/// Occupancy grid over the unit cube [0,1]^3 at resolution R per axis. A
/// voxel is occupied iff at least one normalized point fell into it; the
/// per-voxel point count is kept so the reference descriptor can weight
/// repeated hits exactly like the direct computation does.
struct VoxelGrid {
  std::uint32_t r = 0;
  std::vector<std::uint32_t> counts;  // x-major, then y, then z

  std::size_t index(std::uint32_t x, std::uint32_t y, std::uint32_t z) const {
    return (static_cast<std::size_t>(x) * r + y) * r + z;
  }
  bool occupied(std::uint32_t x, std::uint32_t y, std::uint32_t z) const {
    return counts[index(x, y, z)] > 0;
  }
  std::size_t occupied_count() const;
};

/// Bins an already-normalized cloud; voxel index per axis is
/// min(floor(coord * R), R - 1).
///
/// Throws PointOutOfRange for coordinates outside [0,1] (1e-6 slack).
VoxelGrid voxelize_points(const PointCloud& normalized, std::uint32_t r);

/// Brute-force reference descriptor: per column (p, q) the height multiset is
/// the occupied voxel centers (z + 0.5) / R, one entry per point that fell in
/// the voxel, run through the same percentile rule. Empty columns get the
/// 1.2 sentinel.
MLHDescriptor mlh_from_voxels(const VoxelGrid& grid, std::uint32_t k);

struct ConsistencyViolation {
  std::uint32_t p = 0, q = 0, layer = 0;
  float height = 0.0f;
};

struct ConsistencyReport {
  std::size_t checked_heights = 0;
  std::vector<ConsistencyViolation> violations;

  bool pass() const { return violations.empty(); }
};

/// Verifies that every finite height in the descriptor is attested by an
/// occupied voxel in the same column: |voxel_center - h| <= 0.5/R + 1e-6.
/// Layers 1 and k always satisfy this (they are data points up to
/// quantization); interpolated middle layers of a column whose surface has a
/// gap (a hollow shape seen from outside) legitimately land inside that gap,
/// so run this with k <= 2 when a clean pass/fail verdict is wanted.
///
/// Throws ResolutionMismatch unless desc.n == grid.r.
ConsistencyReport consistency_check(const MLHDescriptor& desc, const VoxelGrid& grid);

/// True iff the occupied-bin set of the descriptor equals the set of
/// non-empty columns of the grid. Throws ResolutionMismatch.
bool occupancy_matches(const MLHDescriptor& desc, const VoxelGrid& grid);

/// Largest |a - b| over entries, where the sentinel only compares equal to
/// itself (any sentinel/finite mix reports as infinity). Throws
/// ResolutionMismatch unless shapes agree.
double max_entrywise_deviation(const MLHDescriptor& a, const MLHDescriptor& b);

}  // namespace mlh
