#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mlh/dataset.hpp"
#include "mlh/multiview.hpp"
#include "mlh/sgd.hpp"

namespace mlh {

struct EpochStats {
  int epoch = 0;  // 1-based
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;
};

struct TrainReport {
  std::vector<std::string> class_names;
  std::string merge_variant;
  std::uint64_t seed = 0;
  SgdConfig sgd;
  MultiViewConfig network;
  std::vector<EpochStats> epochs;
  std::vector<std::vector<std::uint64_t>> confusion;  // [true][predicted], test split
  double final_test_accuracy = 0.0;
};

struct TrainOptions {
  MultiViewConfig network;
  SgdConfig sgd;
  std::uint64_t seed = 0;
};

struct TrainResult {
  MultiViewNetwork<float> net;
  TrainReport report;
};

/// "shared-max", "ind-max" or "ind-cat" (the merge designs under comparison).
std::string variant_name(const MultiViewConfig& config);

/// Parses a variant name back into (shared, merge); throws ConfigInvalid.
void apply_variant(MultiViewConfig& config, const std::string& name);

/// Trains a fresh multi-view network on the dataset's train split with
/// seeded shuffling and the stepped learning-rate schedule, evaluating the
/// test split after every epoch. Deterministic for fixed inputs: the same
/// call produces a byte-identical report and checkpoint.
TrainResult train(const Dataset& dataset, const TrainOptions& options);

enum class Split { Test, Train, All };

struct EvalResult {
  double accuracy = 0.0;
  std::vector<std::vector<std::uint64_t>> confusion;
  std::size_t sample_count = 0;
};

EvalResult evaluate(MultiViewNetwork<float>& net, const Dataset& dataset,
                    Split split = Split::Test);

/// Fixed-schema JSON document for CI consumption; key order and float
/// formatting are deterministic.
std::string report_to_json(const TrainReport& report);
std::string eval_to_json(const EvalResult& result, const std::vector<std::string>& class_names);

}  // namespace mlh
