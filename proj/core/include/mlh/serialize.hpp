#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "mlh/dataset.hpp"
#include "mlh/descriptor.hpp"
#include "mlh/multiview.hpp"

namespace mlh {

// ---------------------------------------------------------------------------
// MLHD1 - one descriptor.
//   magic "MLHD" | u32le version=1 | u32le N | u32le k
//   u8 view tag (0=X, 1=Y, 2=Z, 3=custom) | tag 3 only: 3 x f32le normal
//   N*N*k f32le payload, p outer, q middle, layer inner
// A custom view stores only its normal; the reader re-derives the grid basis
// deterministically, so file bytes round-trip exactly.
// ---------------------------------------------------------------------------

std::vector<std::uint8_t> encode_descriptor(const MLHDescriptor& desc);
MLHDescriptor decode_descriptor(std::span<const std::uint8_t> bytes);

void write_descriptor_file(const MLHDescriptor& desc, const std::filesystem::path& path);
MLHDescriptor read_descriptor_file(const std::filesystem::path& path);

/// Deterministic grid basis for a bare normal: the in-plane u axis is the
/// normalized rejection of the canonical axis least aligned with the normal,
/// v completes the right-handed frame.
ViewDirection view_from_normal(const Vec3& normal);

// ---------------------------------------------------------------------------
// MLHS - a labelled dataset of three-view bundles.
//   magic "MLHS" | u32le version=1
//   u32le class count | per class: u32le length + name bytes
//   u32le N | u32le k | u32le record count
//   per record: u32le length + id bytes | u32le label | u8 is_test
//               3 embedded MLHD1 blobs in X, Y, Z order
// ---------------------------------------------------------------------------

std::vector<std::uint8_t> encode_dataset(const Dataset& dataset);
Dataset decode_dataset(std::span<const std::uint8_t> bytes);

void write_dataset_file(const Dataset& dataset, const std::filesystem::path& path);
Dataset read_dataset_file(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// MLHW - a multi-view network checkpoint.
//   magic "MLHW" | u32le version=1
//   u8 merge kind | u8 shared | u32le classes | u32le N | u32le k
//   u32le conv channels | u32le fc width
//   u32le layer count | per layer: u8 kind tag | u32le tensor count |
//     per tensor: u32le ndim | ndim x u32le dims | f32le data
// Layers walk branches X, Y, Z, then the merge conv (ConcatConv only), then
// the head. Conv layers carry weight and bias; batch norm carries gamma,
// beta and both running statistics.
// ---------------------------------------------------------------------------

std::vector<std::uint8_t> encode_checkpoint(MultiViewNetwork<float>& net);
MultiViewNetwork<float> decode_checkpoint(std::span<const std::uint8_t> bytes);

void write_checkpoint_file(MultiViewNetwork<float>& net, const std::filesystem::path& path);
MultiViewNetwork<float> read_checkpoint_file(const std::filesystem::path& path);

// Raw helpers shared with the CLI.
std::vector<std::uint8_t> read_binary_file(const std::filesystem::path& path);
void write_binary_file(std::span<const std::uint8_t> bytes, const std::filesystem::path& path);

}  // namespace mlh
