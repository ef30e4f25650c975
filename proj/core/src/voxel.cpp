#include "mlh/voxel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mlh/errors.hpp"

namespace mlh {

namespace {

std::uint32_t axis_index(double coord, std::uint32_t r) {
  if (coord < -1e-6 || coord > 1.0 + 1e-6) {
    throw PointOutOfRange("point coordinate " + std::to_string(coord) +
                          " outside the unit cube");
  }
  const double c = std::clamp(coord, 0.0, 1.0);
  return std::min(static_cast<std::uint32_t>(c * r), r - 1);
}

}  // namespace

std::size_t VoxelGrid::occupied_count() const {
  std::size_t n = 0;
  for (std::uint32_t c : counts) n += c > 0;
  return n;
}

VoxelGrid voxelize_points(const PointCloud& normalized, std::uint32_t r) {
  if (r < 1) throw InvalidParams("voxel resolution must be >= 1");
  VoxelGrid grid;
  grid.r = r;
  grid.counts.assign(static_cast<std::size_t>(r) * r * r, 0);
  for (const Vec3& p : normalized.points) {
    ++grid.counts[grid.index(axis_index(p.x, r), axis_index(p.y, r), axis_index(p.z, r))];
  }
  return grid;
}

MLHDescriptor mlh_from_voxels(const VoxelGrid& grid, std::uint32_t k) {
  if (k < 1) throw InvalidParams("layer count must be >= 1");
  const std::uint32_t r = grid.r;
  MLHDescriptor desc;
  desc.n = r;
  desc.k = k;
  desc.grid.assign(static_cast<std::size_t>(r) * r * k, MLHDescriptor::kEmpty);

  std::vector<double> heights;
  std::vector<double> layers(k);
  for (std::uint32_t p = 0; p < r; ++p) {
    for (std::uint32_t q = 0; q < r; ++q) {
      heights.clear();
      for (std::uint32_t z = 0; z < r; ++z) {
        const std::uint32_t count = grid.counts[grid.index(p, q, z)];
        const double center = (static_cast<double>(z) + 0.5) / static_cast<double>(r);
        for (std::uint32_t c = 0; c < count; ++c) heights.push_back(center);
      }
      if (heights.empty()) continue;
      float* out = desc.grid.data() + (static_cast<std::size_t>(p) * r + q) * k;
      if (k == 1) {
        out[0] = static_cast<float>(heights.front());
        continue;
      }
      for (std::uint32_t i = 0; i < k; ++i) {
        const double fraction = static_cast<double>(i) / static_cast<double>(k - 1);
        out[i] = static_cast<float>(percentile(heights, fraction));
      }
    }
  }
  return desc;
}

ConsistencyReport consistency_check(const MLHDescriptor& desc, const VoxelGrid& grid) {
  if (desc.n != grid.r) {
    throw ResolutionMismatch("descriptor resolution " + std::to_string(desc.n) +
                             " != voxel resolution " + std::to_string(grid.r));
  }
  const std::uint32_t r = grid.r;
  const double tol = 0.5 / static_cast<double>(r) + 1e-6;

  ConsistencyReport report;
  for (std::uint32_t p = 0; p < desc.n; ++p) {
    for (std::uint32_t q = 0; q < desc.n; ++q) {
      if (desc.bin_empty(p, q)) continue;
      for (std::uint32_t i = 0; i < desc.k; ++i) {
        const double h = desc.at(p, q, i);
        ++report.checked_heights;
        bool attested = false;
        for (std::uint32_t z = 0; z < r && !attested; ++z) {
          if (!grid.occupied(p, q, z)) continue;
          const double center = (static_cast<double>(z) + 0.5) / static_cast<double>(r);
          attested = std::abs(center - h) <= tol;
        }
        if (!attested) {
          report.violations.push_back({p, q, i, desc.at(p, q, i)});
        }
      }
    }
  }
  return report;
}

bool occupancy_matches(const MLHDescriptor& desc, const VoxelGrid& grid) {
  if (desc.n != grid.r) {
    throw ResolutionMismatch("descriptor resolution " + std::to_string(desc.n) +
                             " != voxel resolution " + std::to_string(grid.r));
  }
  for (std::uint32_t p = 0; p < desc.n; ++p) {
    for (std::uint32_t q = 0; q < desc.n; ++q) {
      bool column_occupied = false;
      for (std::uint32_t z = 0; z < grid.r && !column_occupied; ++z) {
        column_occupied = grid.occupied(p, q, z);
      }
      if (column_occupied == desc.bin_empty(p, q)) return false;
    }
  }
  return true;
}

double max_entrywise_deviation(const MLHDescriptor& a, const MLHDescriptor& b) {
  if (a.n != b.n || a.k != b.k) {
    throw ResolutionMismatch("descriptor shapes differ: " + std::to_string(a.n) + "x" +
                             std::to_string(a.k) + " vs " + std::to_string(b.n) + "x" +
                             std::to_string(b.k));
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < a.grid.size(); ++i) {
    const float va = a.grid[i], vb = b.grid[i];
    const bool ea = va == MLHDescriptor::kEmpty, eb = vb == MLHDescriptor::kEmpty;
    if (ea != eb) return std::numeric_limits<double>::infinity();
    if (!ea) worst = std::max(worst, std::abs(static_cast<double>(va) - vb));
  }
  return worst;
}

}  // namespace mlh
