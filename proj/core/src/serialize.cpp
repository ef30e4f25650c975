#include "mlh/serialize.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "mlh/errors.hpp"

namespace mlh {

namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big,
              "mixed-endian targets are not supported");

void push_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 24));
}

void push_f32(std::vector<std::uint8_t>& out, float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, 4);
  push_u32(out, bits);
}

void push_f32_span(std::vector<std::uint8_t>& out, std::span<const float> values) {
  if constexpr (std::endian::native == std::endian::little) {
    const auto* raw = reinterpret_cast<const std::uint8_t*>(values.data());
    out.insert(out.end(), raw, raw + values.size() * 4);
  } else {
    for (float v : values) push_f32(out, v);
  }
}

void push_string(std::vector<std::uint8_t>& out, std::string_view s) {
  push_u32(out, static_cast<std::uint32_t>(s.size()));
  out.insert(out.end(), s.begin(), s.end());
}

/// Sequential reader over an encoded blob.
class Cursor {
 public:
  explicit Cursor(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  void expect_magic(const char* magic) {
    if (bytes_.size() - pos_ < 4 || std::memcmp(bytes_.data() + pos_, magic, 4) != 0) {
      throw BadMagic(std::string("expected magic '") + magic + "'");
    }
    pos_ += 4;
  }

  std::uint8_t u8() {
    need(1);
    return bytes_[pos_++];
  }

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = static_cast<std::uint32_t>(bytes_[pos_]) |
                      static_cast<std::uint32_t>(bytes_[pos_ + 1]) << 8 |
                      static_cast<std::uint32_t>(bytes_[pos_ + 2]) << 16 |
                      static_cast<std::uint32_t>(bytes_[pos_ + 3]) << 24;
    pos_ += 4;
    return v;
  }

  float f32() {
    const std::uint32_t bits = u32();
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
  }

  void f32_span(float* dst, std::size_t count) {
    need(count * 4);
    if constexpr (std::endian::native == std::endian::little) {
      std::memcpy(dst, bytes_.data() + pos_, count * 4);
      pos_ += count * 4;
    } else {
      for (std::size_t i = 0; i < count; ++i) dst[i] = f32();
    }
  }

  std::string string() {
    const std::uint32_t len = u32();
    need(len);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), len);
    pos_ += len;
    return s;
  }

  std::size_t remaining() const { return bytes_.size() - pos_; }
  std::span<const std::uint8_t> tail() const { return bytes_.subspan(pos_); }
  void skip(std::size_t n) {
    need(n);
    pos_ += n;
  }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw LengthMismatch("payload shorter than its header claims");
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

constexpr std::uint32_t kFormatVersion = 1;

}  // namespace

ViewDirection view_from_normal(const Vec3& normal) {
  const double len = norm(normal);
  // f32 storage rounds a unit normal by up to ~1e-7; accept that and keep the
  // stored value bit-exact so files round-trip.
  if (std::abs(len - 1.0) > 1e-6) throw InvalidParams("view normal must be unit length");
  const Vec3 unit = normal / len;
  // Axis least aligned with the normal seeds the in-plane frame.
  const Vec3 axes[3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  int least = 0;
  double best = std::abs(unit.x);
  if (std::abs(unit.y) < best) {
    least = 1;
    best = std::abs(unit.y);
  }
  if (std::abs(unit.z) < best) least = 2;
  Vec3 u = axes[least] - unit * dot(axes[least], unit);
  u = u / norm(u);
  const Vec3 v = cross(unit, u);
  return ViewDirection{ViewDirection::Tag::Custom, normal, u, v};
}

std::vector<std::uint8_t> encode_descriptor(const MLHDescriptor& desc) {
  std::vector<std::uint8_t> out;
  out.reserve(17 + desc.grid.size() * 4);
  out.insert(out.end(), {'M', 'L', 'H', 'D'});
  push_u32(out, kFormatVersion);
  push_u32(out, desc.n);
  push_u32(out, desc.k);
  out.push_back(static_cast<std::uint8_t>(desc.view.tag));
  if (desc.view.tag == ViewDirection::Tag::Custom) {
    push_f32(out, static_cast<float>(desc.view.normal.x));
    push_f32(out, static_cast<float>(desc.view.normal.y));
    push_f32(out, static_cast<float>(desc.view.normal.z));
  }
  push_f32_span(out, desc.grid);
  return out;
}

MLHDescriptor decode_descriptor(std::span<const std::uint8_t> bytes) {
  Cursor cursor(bytes);
  MLHDescriptor desc = [&] {
    cursor.expect_magic("MLHD");
    const std::uint32_t version = cursor.u32();
    if (version != kFormatVersion) {
      throw VersionUnsupported("MLHD version " + std::to_string(version));
    }
    MLHDescriptor d;
    d.n = cursor.u32();
    d.k = cursor.u32();
    const std::uint8_t tag = cursor.u8();
    switch (tag) {
      case 0: d.view = ViewDirection::pos_x(); break;
      case 1: d.view = ViewDirection::pos_y(); break;
      case 2: d.view = ViewDirection::pos_z(); break;
      case 3: {
        const float nx = cursor.f32(), ny = cursor.f32(), nz = cursor.f32();
        d.view = view_from_normal({nx, ny, nz});
        break;
      }
      default: throw BadMagic("unknown view tag " + std::to_string(tag));
    }
    return d;
  }();
  const std::size_t count = static_cast<std::size_t>(desc.n) * desc.n * desc.k;
  if (cursor.remaining() != count * 4) {
    throw LengthMismatch("MLHD payload holds " + std::to_string(cursor.remaining() / 4) +
                         " floats, header needs " + std::to_string(count));
  }
  desc.grid.resize(count);
  cursor.f32_span(desc.grid.data(), count);
  return desc;
}

std::vector<std::uint8_t> encode_dataset(const Dataset& dataset) {
  std::vector<std::uint8_t> out;
  out.insert(out.end(), {'M', 'L', 'H', 'S'});
  push_u32(out, kFormatVersion);
  push_u32(out, static_cast<std::uint32_t>(dataset.class_names.size()));
  for (const auto& name : dataset.class_names) push_string(out, name);
  push_u32(out, dataset.n);
  push_u32(out, dataset.k);
  push_u32(out, static_cast<std::uint32_t>(dataset.records.size()));
  for (const auto& record : dataset.records) {
    if (record.label >= dataset.class_names.size()) {
      throw LabelOutOfRange("record '" + record.id + "' label " + std::to_string(record.label));
    }
    push_string(out, record.id);
    push_u32(out, record.label);
    out.push_back(record.is_test ? 1 : 0);
    for (const auto& view : record.bundle.views) {
      if (view.n != dataset.n || view.k != dataset.k) {
        throw ShapeMismatch("record '" + record.id + "' does not share the dataset (n, k)");
      }
      const auto blob = encode_descriptor(view);
      out.insert(out.end(), blob.begin(), blob.end());
    }
  }
  return out;
}

Dataset decode_dataset(std::span<const std::uint8_t> bytes) {
  Cursor cursor(bytes);
  cursor.expect_magic("MLHS");
  const std::uint32_t version = cursor.u32();
  if (version != kFormatVersion) throw VersionUnsupported("MLHS version " + std::to_string(version));

  Dataset dataset;
  const std::uint32_t classes = cursor.u32();
  for (std::uint32_t c = 0; c < classes; ++c) dataset.class_names.push_back(cursor.string());
  dataset.n = cursor.u32();
  dataset.k = cursor.u32();
  const std::uint32_t records = cursor.u32();
  const std::size_t grid_bytes = static_cast<std::size_t>(dataset.n) * dataset.n * dataset.k * 4;
  dataset.records.reserve(records);
  for (std::uint32_t i = 0; i < records; ++i) {
    DatasetRecord record;
    record.id = cursor.string();
    record.label = cursor.u32();
    if (record.label >= classes) {
      throw LabelOutOfRange("record '" + record.id + "' label " + std::to_string(record.label));
    }
    record.is_test = cursor.u8() != 0;
    record.bundle.shape_id = record.id;
    for (auto& view : record.bundle.views) {
      // Each embedded blob is a complete MLHD1 stream; canonical tags are 17
      // bytes of header, a custom tag adds its 12-byte normal.
      if (cursor.remaining() < 17) throw LengthMismatch("dataset record truncated");
      const std::uint8_t tag = cursor.tail()[16];
      const std::size_t blob_size = 17 + (tag == 3 ? 12 : 0) + grid_bytes;
      if (cursor.remaining() < blob_size) throw LengthMismatch("dataset record truncated");
      view = decode_descriptor(cursor.tail().subspan(0, blob_size));
      if (view.n != dataset.n || view.k != dataset.k) {
        throw ShapeMismatch("record '" + record.id + "' does not share the dataset (n, k)");
      }
      cursor.skip(blob_size);
    }
    dataset.records.push_back(std::move(record));
  }
  if (cursor.remaining() != 0) throw LengthMismatch("trailing bytes after the last record");
  return dataset;
}

namespace {

void push_tensor(std::vector<std::uint8_t>& out, const Tensor<float>& t) {
  push_u32(out, static_cast<std::uint32_t>(t.rank()));
  for (std::size_t d : t.shape) push_u32(out, static_cast<std::uint32_t>(d));
  push_f32_span(out, t.data);
}

void read_tensor_into(Cursor& cursor, Tensor<float>& t) {
  const std::uint32_t rank = cursor.u32();
  std::vector<std::size_t> dims(rank);
  for (auto& d : dims) d = cursor.u32();
  if (dims != t.shape) {
    throw LengthMismatch("checkpoint tensor shape does not match the network");
  }
  cursor.f32_span(t.data.data(), t.numel());
}

void push_layer(std::vector<std::uint8_t>& out, Layer<float>& layer) {
  out.push_back(static_cast<std::uint8_t>(layer.kind()));
  const auto tensors = layer.state();
  push_u32(out, static_cast<std::uint32_t>(tensors.size()));
  for (const Tensor<float>* t : tensors) push_tensor(out, *t);
}

void read_layer_into(Cursor& cursor, Layer<float>& layer) {
  const std::uint8_t tag = cursor.u8();
  if (tag != static_cast<std::uint8_t>(layer.kind())) {
    throw LengthMismatch("checkpoint layer tag does not match the network structure");
  }
  const std::uint32_t count = cursor.u32();
  auto tensors = layer.state();
  if (count != tensors.size()) {
    throw LengthMismatch("checkpoint layer tensor count does not match the network");
  }
  for (Tensor<float>* t : tensors) read_tensor_into(cursor, *t);
}

template <typename Fn>
void walk_layers(MultiViewNetwork<float>& net, Fn&& fn) {
  for (auto& branch : net.branches) {
    for (std::size_t i = 0; i < branch.size(); ++i) fn(branch[i]);
  }
  if (net.merge_conv) fn(*net.merge_conv);
  for (std::size_t i = 0; i < net.head.size(); ++i) fn(net.head[i]);
}

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(MultiViewNetwork<float>& net) {
  std::vector<std::uint8_t> out;
  out.insert(out.end(), {'M', 'L', 'H', 'W'});
  push_u32(out, kFormatVersion);
  out.push_back(static_cast<std::uint8_t>(net.config.merge));
  out.push_back(net.config.shared ? 1 : 0);
  push_u32(out, static_cast<std::uint32_t>(net.config.classes));
  push_u32(out, static_cast<std::uint32_t>(net.config.n));
  push_u32(out, static_cast<std::uint32_t>(net.config.k));
  push_u32(out, static_cast<std::uint32_t>(net.config.conv_channels));
  push_u32(out, static_cast<std::uint32_t>(net.config.fc_width));

  std::uint32_t layer_count = 0;
  walk_layers(net, [&](Layer<float>&) { ++layer_count; });
  push_u32(out, layer_count);
  walk_layers(net, [&](Layer<float>& layer) { push_layer(out, layer); });
  return out;
}

MultiViewNetwork<float> decode_checkpoint(std::span<const std::uint8_t> bytes) {
  Cursor cursor(bytes);
  cursor.expect_magic("MLHW");
  const std::uint32_t version = cursor.u32();
  if (version != kFormatVersion) throw VersionUnsupported("MLHW version " + std::to_string(version));

  MultiViewConfig config;
  const std::uint8_t merge = cursor.u8();
  if (merge > 1) throw LengthMismatch("unknown merge kind " + std::to_string(merge));
  config.merge = static_cast<MergeKind>(merge);
  config.shared = cursor.u8() != 0;
  config.classes = cursor.u32();
  config.n = cursor.u32();
  config.k = cursor.u32();
  config.conv_channels = cursor.u32();
  config.fc_width = cursor.u32();

  MultiViewNetwork<float> net = build_multiview_net<float>(config, 0);
  std::uint32_t expected_layers = 0;
  walk_layers(net, [&](Layer<float>&) { ++expected_layers; });
  const std::uint32_t layer_count = cursor.u32();
  if (layer_count != expected_layers) {
    throw LengthMismatch("checkpoint layer count " + std::to_string(layer_count) + " != " +
                         std::to_string(expected_layers));
  }
  walk_layers(net, [&](Layer<float>& layer) { read_layer_into(cursor, layer); });
  if (cursor.remaining() != 0) throw LengthMismatch("trailing bytes after the last layer");
  return net;
}

std::vector<std::uint8_t> read_binary_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string() + ": cannot open");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return bytes;
}

void write_binary_file(std::span<const std::uint8_t> bytes, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path.string() + ": cannot open for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError(path.string() + ": write failed");
}

void write_descriptor_file(const MLHDescriptor& desc, const std::filesystem::path& path) {
  write_binary_file(encode_descriptor(desc), path);
}

MLHDescriptor read_descriptor_file(const std::filesystem::path& path) {
  return decode_descriptor(read_binary_file(path));
}

void write_dataset_file(const Dataset& dataset, const std::filesystem::path& path) {
  write_binary_file(encode_dataset(dataset), path);
}

Dataset read_dataset_file(const std::filesystem::path& path) {
  return decode_dataset(read_binary_file(path));
}

void write_checkpoint_file(MultiViewNetwork<float>& net, const std::filesystem::path& path) {
  write_binary_file(encode_checkpoint(net), path);
}

MultiViewNetwork<float> read_checkpoint_file(const std::filesystem::path& path) {
  return decode_checkpoint(read_binary_file(path));
}

}  // namespace mlh
