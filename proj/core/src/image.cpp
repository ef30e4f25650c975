#include "mlh/image.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <string>

#include "mlh/errors.hpp"

namespace mlh {

GrayImage export_layer_image(const MLHDescriptor& desc, std::uint32_t layer) {
  if (layer < 1 || layer > desc.k) {
    throw LayerOutOfRange("layer " + std::to_string(layer) + " outside [1, " +
                          std::to_string(desc.k) + "]");
  }
  GrayImage image;
  image.width = desc.n;
  image.height = desc.n;
  image.pixels.resize(static_cast<std::size_t>(desc.n) * desc.n);
  for (std::uint32_t row = 0; row < desc.n; ++row) {
    const std::uint32_t q = desc.n - 1 - row;
    for (std::uint32_t p = 0; p < desc.n; ++p) {
      const float v = desc.at(p, q, layer - 1);
      std::uint8_t pixel;
      if (v == MLHDescriptor::kEmpty) {
        pixel = 255;
      } else {
        pixel = static_cast<std::uint8_t>(std::lround(static_cast<double>(v) * 254.0));
      }
      image.pixels[static_cast<std::size_t>(row) * image.width + p] = pixel;
    }
  }
  return image;
}

std::vector<std::uint8_t> encode_pgm(const GrayImage& image) {
  std::string header = "P5\n" + std::to_string(image.width) + " " + std::to_string(image.height) +
                       "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), image.pixels.begin(), image.pixels.end());
  return out;
}

namespace {

void write_file(const std::vector<std::uint8_t>& bytes, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path.string() + ": cannot open for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError(path.string() + ": write failed");
}

std::uint32_t crc32(const std::uint8_t* data, std::size_t size, std::uint32_t crc = 0) {
  static const auto table = [] {
    std::array<std::uint32_t, 256> t{};
    for (std::uint32_t i = 0; i < 256; ++i) {
      std::uint32_t c = i;
      for (int bit = 0; bit < 8; ++bit) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
      t[i] = c;
    }
    return t;
  }();
  crc ^= 0xFFFFFFFFu;
  for (std::size_t i = 0; i < size; ++i) crc = table[(crc ^ data[i]) & 0xFF] ^ (crc >> 8);
  return crc ^ 0xFFFFFFFFu;
}

std::uint32_t adler32(const std::uint8_t* data, std::size_t size) {
  std::uint32_t a = 1, b = 0;
  for (std::size_t i = 0; i < size; ++i) {
    a = (a + data[i]) % 65521u;
    b = (b + a) % 65521u;
  }
  return (b << 16) | a;
}

void push_u32_be(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

void push_chunk(std::vector<std::uint8_t>& out, const char* type,
                const std::vector<std::uint8_t>& payload) {
  push_u32_be(out, static_cast<std::uint32_t>(payload.size()));
  const std::size_t crc_start = out.size();
  out.insert(out.end(), type, type + 4);
  out.insert(out.end(), payload.begin(), payload.end());
  push_u32_be(out, crc32(out.data() + crc_start, out.size() - crc_start));
}

}  // namespace

std::vector<std::uint8_t> encode_png(const GrayImage& image) {
  // Raw scanlines, each prefixed with filter byte 0.
  std::vector<std::uint8_t> raw;
  raw.reserve(static_cast<std::size_t>(image.height) * (image.width + 1));
  for (std::uint32_t row = 0; row < image.height; ++row) {
    raw.push_back(0);
    const std::uint8_t* line = image.pixels.data() + static_cast<std::size_t>(row) * image.width;
    raw.insert(raw.end(), line, line + image.width);
  }

  // zlib stream made of stored (uncompressed) deflate blocks.
  std::vector<std::uint8_t> zlib;
  zlib.push_back(0x78);
  zlib.push_back(0x01);
  constexpr std::size_t kMaxBlock = 65535;
  std::size_t offset = 0;
  do {
    const std::size_t len = std::min(kMaxBlock, raw.size() - offset);
    const bool final_block = offset + len == raw.size();
    zlib.push_back(final_block ? 1 : 0);
    zlib.push_back(static_cast<std::uint8_t>(len & 0xFF));
    zlib.push_back(static_cast<std::uint8_t>(len >> 8));
    zlib.push_back(static_cast<std::uint8_t>(~len & 0xFF));
    zlib.push_back(static_cast<std::uint8_t>((~len >> 8) & 0xFF));
    zlib.insert(zlib.end(), raw.begin() + static_cast<std::ptrdiff_t>(offset),
                raw.begin() + static_cast<std::ptrdiff_t>(offset + len));
    offset += len;
  } while (offset < raw.size());
  push_u32_be(zlib, adler32(raw.data(), raw.size()));

  std::vector<std::uint8_t> ihdr;
  push_u32_be(ihdr, image.width);
  push_u32_be(ihdr, image.height);
  ihdr.push_back(8);  // bit depth
  ihdr.push_back(0);  // grayscale
  ihdr.push_back(0);  // deflate
  ihdr.push_back(0);  // filter method
  ihdr.push_back(0);  // no interlace

  std::vector<std::uint8_t> out = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};
  push_chunk(out, "IHDR", ihdr);
  push_chunk(out, "IDAT", zlib);
  push_chunk(out, "IEND", {});
  return out;
}

void write_pgm(const GrayImage& image, const std::filesystem::path& path) {
  write_file(encode_pgm(image), path);
}

void write_png(const GrayImage& image, const std::filesystem::path& path) {
  write_file(encode_png(image), path);
}

}  // namespace mlh
