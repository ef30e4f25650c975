#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mlh/geometry.hpp"
#include "mlh/sampling.hpp"

namespace mlh {

/// Direction along which heights are measured. The three canonical views map
/// the chosen axis onto +Z by a right-handed axis cycle; a custom view
/// carries its own grid-plane basis (u, v) because nothing canonical defines
/// the in-plane orientation for an arbitrary normal.
struct ViewDirection {
  enum class Tag : std::uint8_t { PosX = 0, PosY = 1, PosZ = 2, Custom = 3 };

  Tag tag = Tag::PosZ;
  Vec3 normal{0, 0, 1};
  Vec3 plane_u{1, 0, 0};
  Vec3 plane_v{0, 1, 0};

  static ViewDirection pos_x() { return {Tag::PosX, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}}; }
  static ViewDirection pos_y() { return {Tag::PosY, {0, 1, 0}, {0, 0, 1}, {1, 0, 0}}; }
  static ViewDirection pos_z() { return {Tag::PosZ, {0, 0, 1}, {1, 0, 0}, {0, 1, 0}}; }

  /// Custom unit normal with caller-supplied in-plane axes. Throws
  /// InvalidParams unless (u, v, n) is right-handed orthonormal within 1e-9.
  static ViewDirection custom(const Vec3& n, const Vec3& u, const Vec3& v);

  /// Rotates p so the view direction becomes +Z. Canonical views are exact
  /// coordinate permutations.
  Vec3 rotate(const Vec3& p) const;

  bool operator==(const ViewDirection& o) const = default;
};

/// N x N x k height grid for one view. Layout is row-major with the layer as
/// the fastest axis: value(p, q, layer) at grid[(p * n + q) * k + layer].
/// Finite entries lie in [0, 1]; bins no point projects into hold the
/// sentinel 1.2 in every layer.
struct MLHDescriptor {
  static constexpr float kEmpty = 1.2f;

  std::uint32_t n = 0;  // grid resolution
  std::uint32_t k = 0;  // layers per bin
  ViewDirection view;
  std::vector<float> grid;

  float at(std::uint32_t p, std::uint32_t q, std::uint32_t layer) const {
    return grid[(static_cast<std::size_t>(p) * n + q) * k + layer];
  }
  bool bin_empty(std::uint32_t p, std::uint32_t q) const {
    return at(p, q, 0) == kEmpty;
  }

  bool operator==(const MLHDescriptor& o) const = default;
};

/// The three canonical-view descriptors of one shape, identical (n, k).
struct MultiViewBundle {
  std::string shape_id;
  std::array<MLHDescriptor, 3> views;  // X, Y, Z order

  bool operator==(const MultiViewBundle& o) const = default;
};

/// Interpolated percentile: sort ascending, rank r = f * (n - 1), then
/// linear interpolation between the neighbouring order statistics. f = 0 and
/// f = 1 return the exact minimum / maximum elements.
///
/// Throws EmptyList. f must be in [0, 1].
double percentile(std::span<const double> values, double fraction);

/// Rotates the cloud so the view direction maps to +Z, translates the
/// rotated bounding-box minimum to the origin and scales uniformly by
/// 1 / (max extent), landing in [0,1]^3 exactly. A degenerate cloud (zero
/// max extent) collapses to the origin.
///
/// Throws EmptyCloud.
PointCloud orient_and_normalize(const PointCloud& cloud, const ViewDirection& view);

/// Descriptor of an already-normalized cloud (all points in [0,1]^3).
/// Bin index per axis is min(floor(coord * N), N - 1). Occupied bins store
/// the ((i-1)/(k-1))-percentiles of their height multiset (the minimum when
/// k = 1); empty bins store the 1.2 sentinel.
MLHDescriptor compute_mlh_from_normalized(const PointCloud& normalized, std::uint32_t n,
                                          std::uint32_t k, const ViewDirection& view);

/// orient_and_normalize followed by compute_mlh_from_normalized.
MLHDescriptor compute_mlh(const PointCloud& cloud, std::uint32_t n, std::uint32_t k,
                          const ViewDirection& view);

/// Samples the mesh once and computes the three canonical-view descriptors
/// from that shared cloud. Deterministic for a fixed config seed.
MultiViewBundle compute_bundle(const TriangleMesh& mesh, std::uint32_t n, std::uint32_t k,
                               const SamplingConfig& config);

/// Throws Error with a diagnostic if the descriptor breaks a structural
/// invariant: a value outside [0,1] that is not the sentinel, a bin mixing
/// sentinel and finite layers, or layers that decrease with the index.
void check_descriptor_invariants(const MLHDescriptor& desc);

}  // namespace mlh
