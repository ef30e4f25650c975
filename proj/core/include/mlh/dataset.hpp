#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mlh/descriptor.hpp"

namespace mlh {

struct DatasetRecord {
  std::string id;
  std::uint32_t label = 0;
  bool is_test = false;
  MultiViewBundle bundle;
};

/// In-memory form of an MLHS file: labelled three-view descriptor bundles
/// sharing one (n, k).
struct Dataset {
  std::uint32_t n = 0;
  std::uint32_t k = 0;
  std::vector<std::string> class_names;  // sorted; index = label
  std::vector<DatasetRecord> records;

  std::size_t train_count() const;
  std::size_t test_count() const;
};

/// Synthetic desk-scale benchmark: `class_count` primitive classes (taken
/// from box / cone / cylinder / sphere in sorted-name order, so labels match
/// directory-built datasets), `per_class` jittered instances each. Records
/// are class-major; every fifth record (global index % 5 == 4) is the test
/// split. Bitwise deterministic for a fixed seed.
Dataset build_synthetic_dataset(std::uint32_t class_count, std::uint32_t per_class,
                                std::uint32_t n, std::uint32_t k, std::uint64_t seed);

/// ModelNet-style directory layout: <root>/<class>/{train,test}/*.off (and
/// .obj). Labels are assigned in sorted class-name order. Parse failures
/// carry the offending file path.
///
/// Throws EmptyClass when a class directory contributes no shapes.
Dataset build_dataset_from_tree(const std::filesystem::path& root, std::uint32_t n,
                                std::uint32_t k, std::uint64_t seed);

}  // namespace mlh
