#include "mlh/descriptor.hpp"

#include <algorithm>
#include <cmath>

#include "mlh/errors.hpp"
#include "mlh/parallel.hpp"

namespace mlh {

ViewDirection ViewDirection::custom(const Vec3& n, const Vec3& u, const Vec3& v) {
  constexpr double tol = 1e-9;
  if (std::abs(norm(n) - 1.0) > tol || std::abs(norm(u) - 1.0) > tol ||
      std::abs(norm(v) - 1.0) > tol) {
    throw InvalidParams("custom view axes must be unit length");
  }
  if (std::abs(dot(u, v)) > tol || std::abs(dot(u, n)) > tol || std::abs(dot(v, n)) > tol) {
    throw InvalidParams("custom view axes must be orthogonal");
  }
  if (norm(cross(u, v) - n) > 1e-6) {
    throw InvalidParams("custom view basis must be right-handed (u x v = n)");
  }
  return {Tag::Custom, n, u, v};
}

Vec3 ViewDirection::rotate(const Vec3& p) const {
  switch (tag) {
    case Tag::PosZ: return p;
    case Tag::PosX: return {p.y, p.z, p.x};
    case Tag::PosY: return {p.z, p.x, p.y};
    case Tag::Custom: return {dot(p, plane_u), dot(p, plane_v), dot(p, normal)};
  }
  return p;
}

double percentile(std::span<const double> values, double fraction) {
  if (values.empty()) throw EmptyList("percentile of empty list");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double rank = fraction * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(rank);
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = rank - static_cast<double>(lo);
  if (frac == 0.0 || lo == hi) return sorted[lo];
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

namespace {

/// Percentiles of an already-sorted bin; shared by the descriptor and the
/// voxel oracle so both apply the identical estimator.
void sorted_percentile_layers(std::span<const double> sorted, std::uint32_t k, float* out) {
  const std::size_t count = sorted.size();
  if (k == 1) {
    out[0] = static_cast<float>(sorted[0]);
    return;
  }
  for (std::uint32_t i = 0; i < k; ++i) {
    const double fraction = static_cast<double>(i) / static_cast<double>(k - 1);
    const double rank = fraction * static_cast<double>(count - 1);
    const std::size_t lo = static_cast<std::size_t>(rank);
    const std::size_t hi = std::min(lo + 1, count - 1);
    const double frac = rank - static_cast<double>(lo);
    const double value =
        (frac == 0.0 || lo == hi) ? sorted[lo] : sorted[lo] + frac * (sorted[hi] - sorted[lo]);
    out[i] = static_cast<float>(value);
  }
}

}  // namespace

PointCloud orient_and_normalize(const PointCloud& cloud, const ViewDirection& view) {
  if (cloud.points.empty()) throw EmptyCloud("cannot orient an empty cloud");

  PointCloud rotated;
  rotated.points.resize(cloud.points.size());
  Aabb box = Aabb::empty();
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    rotated.points[i] = view.rotate(cloud.points[i]);
    box.expand(rotated.points[i]);
  }

  const double extent = box.max_extent();
  if (extent <= 0.0) {
    for (Vec3& p : rotated.points) p = {0, 0, 0};
    return rotated;
  }
  // Division keeps every coordinate in [0, 1] exactly: fl(p - min) is
  // monotone in p, so it never exceeds fl(max - min), and a correctly
  // rounded quotient of such a pair cannot exceed 1.
  for (Vec3& p : rotated.points) {
    p = {(p.x - box.min.x) / extent, (p.y - box.min.y) / extent, (p.z - box.min.z) / extent};
  }
  return rotated;
}

MLHDescriptor compute_mlh_from_normalized(const PointCloud& normalized, std::uint32_t n,
                                          std::uint32_t k, const ViewDirection& view) {
  if (normalized.points.empty()) throw EmptyCloud("cannot compute a descriptor of an empty cloud");
  if (n < 1 || k < 1) throw InvalidParams("descriptor needs n >= 1 and k >= 1");

  const std::size_t bins = static_cast<std::size_t>(n) * n;
  auto unit = [](double coord) {
    if (coord < -1e-6 || coord > 1.0 + 1e-6) {
      throw PointOutOfRange("normalized coordinate " + std::to_string(coord) +
                            " outside the unit cube");
    }
    return std::clamp(coord, 0.0, 1.0);
  };
  auto bin_of = [n, &unit](const Vec3& p) -> std::size_t {
    const auto axis_idx = [n, &unit](double coord) {
      const auto idx = static_cast<std::uint32_t>(unit(coord) * n);
      return std::min(idx, n - 1);
    };
    return static_cast<std::size_t>(axis_idx(p.x)) * n + axis_idx(p.y);
  };

  // Counting sort of the heights into their bins.
  std::vector<std::size_t> counts(bins + 1, 0);
  for (const Vec3& p : normalized.points) ++counts[bin_of(p) + 1];
  for (std::size_t b = 0; b < bins; ++b) counts[b + 1] += counts[b];
  std::vector<double> heights(normalized.points.size());
  {
    std::vector<std::size_t> cursor(counts.begin(), counts.end() - 1);
    for (const Vec3& p : normalized.points) {
      heights[cursor[bin_of(p)]++] = unit(p.z);
    }
  }

  MLHDescriptor desc;
  desc.n = n;
  desc.k = k;
  desc.view = view;
  desc.grid.assign(bins * k, MLHDescriptor::kEmpty);
  float* grid = desc.grid.data();
  parallel_for(bins, [&](std::size_t begin, std::size_t end) {
    for (std::size_t b = begin; b < end; ++b) {
      const std::size_t lo = counts[b], hi = counts[b + 1];
      if (lo == hi) continue;
      std::sort(heights.begin() + lo, heights.begin() + hi);
      sorted_percentile_layers({heights.data() + lo, hi - lo}, k, grid + b * k);
    }
  });
  return desc;
}

MLHDescriptor compute_mlh(const PointCloud& cloud, std::uint32_t n, std::uint32_t k,
                          const ViewDirection& view) {
  return compute_mlh_from_normalized(orient_and_normalize(cloud, view), n, k, view);
}

MultiViewBundle compute_bundle(const TriangleMesh& mesh, std::uint32_t n, std::uint32_t k,
                               const SamplingConfig& config) {
  const std::size_t count = required_point_count(n, k, config);
  const PointCloud cloud = sample_surface(mesh, count, config.rng_seed);
  MultiViewBundle bundle;
  bundle.views[0] = compute_mlh(cloud, n, k, ViewDirection::pos_x());
  bundle.views[1] = compute_mlh(cloud, n, k, ViewDirection::pos_y());
  bundle.views[2] = compute_mlh(cloud, n, k, ViewDirection::pos_z());
  return bundle;
}

void check_descriptor_invariants(const MLHDescriptor& desc) {
  for (std::uint32_t p = 0; p < desc.n; ++p) {
    for (std::uint32_t q = 0; q < desc.n; ++q) {
      const bool empty = desc.bin_empty(p, q);
      float prev = 0.0f;
      for (std::uint32_t i = 0; i < desc.k; ++i) {
        const float v = desc.at(p, q, i);
        const std::string where = " at bin (" + std::to_string(p) + ", " + std::to_string(q) +
                                  ") layer " + std::to_string(i);
        if (empty) {
          if (v != MLHDescriptor::kEmpty) {
            throw Error("empty bin holds a finite layer" + where);
          }
          continue;
        }
        if (v == MLHDescriptor::kEmpty) {
          throw Error("occupied bin holds the empty sentinel" + where);
        }
        if (!(v >= 0.0f && v <= 1.0f)) {
          throw Error("layer value " + std::to_string(v) + " outside [0, 1]" + where);
        }
        if (i > 0 && v < prev) {
          throw Error("layers decrease" + where);
        }
        prev = v;
      }
    }
  }
}

}  // namespace mlh
