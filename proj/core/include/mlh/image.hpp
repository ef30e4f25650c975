#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "mlh/descriptor.hpp"

namespace mlh {

struct GrayImage {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::vector<std::uint8_t> pixels;  // row-major, row 0 at the top

  std::uint8_t at(std::uint32_t row, std::uint32_t col) const {
    return pixels[static_cast<std::size_t>(row) * width + col];
  }
};

/// Renders one layer (1-based index) as an N x N grayscale image. Heights map
/// linearly [0,1] -> [0,254]; the 1.2 sentinel renders as 255 so empty bins
/// come out white. Image row 0 is grid row q = N-1 (image y grows downward).
///
/// Throws LayerOutOfRange.
GrayImage export_layer_image(const MLHDescriptor& desc, std::uint32_t layer);

/// Binary PGM (P5, maxval 255).
void write_pgm(const GrayImage& image, const std::filesystem::path& path);
std::vector<std::uint8_t> encode_pgm(const GrayImage& image);

/// Minimal 8-bit grayscale PNG (zlib stream with stored deflate blocks).
void write_png(const GrayImage& image, const std::filesystem::path& path);
std::vector<std::uint8_t> encode_png(const GrayImage& image);

}  // namespace mlh
