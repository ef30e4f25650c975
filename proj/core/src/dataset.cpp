#include "mlh/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <string_view>

#include "mlh/errors.hpp"
#include "mlh/mesh_io.hpp"
#include "mlh/primitives.hpp"
#include "mlh/rng.hpp"

namespace mlh {

std::size_t Dataset::train_count() const {
  std::size_t n_train = 0;
  for (const auto& r : records) n_train += !r.is_test;
  return n_train;
}

std::size_t Dataset::test_count() const { return records.size() - train_count(); }

namespace {

struct ClassSpec {
  const char* name;
  PrimitiveKind kind;
};

// Sorted by name; labels follow this order.
constexpr ClassSpec kSyntheticClasses[] = {
    {"box", PrimitiveKind::Box},
    {"cone", PrimitiveKind::Cone},
    {"cylinder", PrimitiveKind::Cylinder},
    {"sphere", PrimitiveKind::Sphere},
};

TriangleMesh synthetic_shape(PrimitiveKind kind, std::uint64_t seed, std::uint64_t record_index) {
  Rng rng = Rng::at(seed ^ 0x5348415045ULL, record_index);  // parameter stream
  PrimitiveParams params;
  params.jitter = 0.015;
  switch (kind) {
    case PrimitiveKind::Box:
      params.extents = {rng.uniform(0.4, 1.6), rng.uniform(0.4, 1.6), rng.uniform(0.4, 1.6)};
      break;
    case PrimitiveKind::Sphere:
      params.radius = rng.uniform(0.4, 1.2);
      params.subdivisions = 3;
      break;
    case PrimitiveKind::Cylinder:
      params.radius = rng.uniform(0.3, 0.9);
      params.height = rng.uniform(0.7, 2.2);
      params.segments = 24;
      break;
    case PrimitiveKind::Cone:
      params.radius = rng.uniform(0.3, 0.9);
      params.height = rng.uniform(0.7, 2.0);
      params.segments = 24;
      break;
  }
  return generate_primitive(kind, params, rng.next_u64());
}

}  // namespace

Dataset build_synthetic_dataset(std::uint32_t class_count, std::uint32_t per_class,
                                std::uint32_t n, std::uint32_t k, std::uint64_t seed) {
  if (class_count < 2 || class_count > 4) {
    throw ConfigInvalid("synthetic dataset supports 2..4 classes");
  }
  if (per_class < 1) throw ConfigInvalid("need at least one shape per class");

  Dataset dataset;
  dataset.n = n;
  dataset.k = k;
  for (std::uint32_t c = 0; c < class_count; ++c) {
    dataset.class_names.push_back(kSyntheticClasses[c].name);
  }

  std::uint64_t record_index = 0;
  for (std::uint32_t c = 0; c < class_count; ++c) {
    const ClassSpec& spec = kSyntheticClasses[c];
    for (std::uint32_t i = 0; i < per_class; ++i, ++record_index) {
      const TriangleMesh mesh = synthetic_shape(spec.kind, seed, record_index);
      SamplingConfig sampling;
      sampling.rng_seed = Rng::at(seed ^ 0x53414D504CULL, record_index).next_u64();

      DatasetRecord record;
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%s_%03u", spec.name, i);
      record.id = buf;
      record.label = c;
      record.is_test = record_index % 5 == 4;  // deterministic 80/20 split
      record.bundle = compute_bundle(mesh, n, k, sampling);
      record.bundle.shape_id = record.id;
      dataset.records.push_back(std::move(record));
    }
  }
  return dataset;
}

Dataset build_dataset_from_tree(const std::filesystem::path& root, std::uint32_t n,
                                std::uint32_t k, std::uint64_t seed) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(root)) throw ConfigInvalid(root.string() + " is not a directory");

  std::vector<std::string> class_names;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.is_directory()) class_names.push_back(entry.path().filename().string());
  }
  std::sort(class_names.begin(), class_names.end());
  if (class_names.empty()) throw EmptyClass("no class directories under " + root.string());

  Dataset dataset;
  dataset.n = n;
  dataset.k = k;
  dataset.class_names = class_names;

  auto is_mesh_file = [](const fs::path& p) {
    std::string ext = p.extension().string();
    for (char& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return ext == ".off" || ext == ".obj";
  };

  std::uint64_t record_index = 0;
  for (std::uint32_t label = 0; label < class_names.size(); ++label) {
    std::size_t shapes_in_class = 0;
    for (const char* split : {"train", "test"}) {
      const fs::path dir = root / class_names[label] / split;
      if (!fs::is_directory(dir)) continue;
      std::vector<fs::path> files;
      for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && is_mesh_file(entry.path())) files.push_back(entry.path());
      }
      std::sort(files.begin(), files.end());
      for (const fs::path& file : files) {
        const TriangleMesh mesh = load_mesh_file(file);  // throws ParseError with the path
        if (mesh.faces.empty()) throw ParseError(file.string() + ": mesh has no faces");
        SamplingConfig sampling;
        sampling.rng_seed = Rng::at(seed ^ 0x53414D504CULL, record_index).next_u64();

        DatasetRecord record;
        record.id = class_names[label] + "/" + file.stem().string();
        record.label = label;
        record.is_test = std::string_view(split) == "test";
        record.bundle = compute_bundle(mesh, n, k, sampling);
        record.bundle.shape_id = record.id;
        dataset.records.push_back(std::move(record));
        ++shapes_in_class;
        ++record_index;
      }
    }
    if (shapes_in_class == 0) {
      throw EmptyClass("class '" + class_names[label] + "' contributes no shapes");
    }
  }
  return dataset;
}

}  // namespace mlh
