#include "mlh/train.hpp"

#include <json.hpp>

#include <algorithm>
#include <utility>

#include "mlh/errors.hpp"
#include "mlh/rng.hpp"

namespace mlh {

namespace {

/// Per-record view planes flattened to the network's input layout
/// (channel = layer, row = q, column = p).
struct PreparedRecord {
  std::uint32_t label = 0;
  bool is_test = false;
  std::array<std::vector<float>, 3> planes;
};

std::vector<float> flatten_descriptor(const MLHDescriptor& desc) {
  std::vector<float> out(static_cast<std::size_t>(desc.k) * desc.n * desc.n);
  for (std::uint32_t p = 0; p < desc.n; ++p) {
    for (std::uint32_t q = 0; q < desc.n; ++q) {
      for (std::uint32_t layer = 0; layer < desc.k; ++layer) {
        out[(static_cast<std::size_t>(layer) * desc.n + q) * desc.n + p] = desc.at(p, q, layer);
      }
    }
  }
  return out;
}

std::vector<PreparedRecord> prepare_records(const Dataset& dataset) {
  std::vector<PreparedRecord> prepared;
  prepared.reserve(dataset.records.size());
  for (const auto& record : dataset.records) {
    PreparedRecord p;
    p.label = record.label;
    p.is_test = record.is_test;
    for (std::size_t v = 0; v < 3; ++v) p.planes[v] = flatten_descriptor(record.bundle.views[v]);
    prepared.push_back(std::move(p));
  }
  return prepared;
}

std::array<Tensor<float>, 3> assemble_batch(const std::vector<PreparedRecord>& records,
                                            const std::vector<std::size_t>& order,
                                            std::size_t begin, std::size_t end, std::size_t n,
                                            std::size_t k) {
  const std::size_t batch = end - begin;
  const std::size_t plane = k * n * n;
  std::array<Tensor<float>, 3> views = {Tensor<float>({batch, k, n, n}),
                                        Tensor<float>({batch, k, n, n}),
                                        Tensor<float>({batch, k, n, n})};
  for (std::size_t b = 0; b < batch; ++b) {
    const PreparedRecord& r = records[order[begin + b]];
    for (std::size_t v = 0; v < 3; ++v) {
      std::copy(r.planes[v].begin(), r.planes[v].end(), views[v].data.data() + b * plane);
    }
  }
  return views;
}

std::size_t argmax_row(const Tensor<float>& logits, std::size_t row) {
  const std::size_t classes = logits.dim(1);
  const float* r = logits.data.data() + row * classes;
  std::size_t best = 0;
  for (std::size_t c = 1; c < classes; ++c) {
    if (r[c] > r[best]) best = c;
  }
  return best;
}

EvalResult evaluate_prepared(MultiViewNetwork<float>& net,
                             const std::vector<PreparedRecord>& records,
                             const std::vector<std::size_t>& indices, std::size_t classes,
                             std::size_t batch_size) {
  EvalResult result;
  result.confusion.assign(classes, std::vector<std::uint64_t>(classes, 0));
  result.sample_count = indices.size();
  std::size_t correct = 0;
  const std::size_t n = net.config.n, k = net.config.k;
  for (std::size_t begin = 0; begin < indices.size(); begin += batch_size) {
    const std::size_t end = std::min(indices.size(), begin + batch_size);
    auto views = assemble_batch(records, indices, begin, end, n, k);
    const Tensor<float> logits = net.forward(views, false);
    for (std::size_t b = 0; b < end - begin; ++b) {
      const std::size_t truth = records[indices[begin + b]].label;
      const std::size_t predicted = argmax_row(logits, b);
      ++result.confusion[truth][predicted];
      correct += predicted == truth;
    }
  }
  result.accuracy =
      indices.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(indices.size());
  return result;
}

std::vector<std::size_t> split_indices(const std::vector<PreparedRecord>& records, Split split) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (split == Split::All || (split == Split::Test) == records[i].is_test) out.push_back(i);
  }
  return out;
}

}  // namespace

std::string variant_name(const MultiViewConfig& config) {
  const std::string merge = config.merge == MergeKind::ElementwiseMax ? "max" : "cat";
  return (config.shared ? "shared-" : "ind-") + merge;
}

void apply_variant(MultiViewConfig& config, const std::string& name) {
  if (name == "shared-max") {
    config.shared = true;
    config.merge = MergeKind::ElementwiseMax;
  } else if (name == "ind-max") {
    config.shared = false;
    config.merge = MergeKind::ElementwiseMax;
  } else if (name == "ind-cat") {
    config.shared = false;
    config.merge = MergeKind::ConcatConv;
  } else {
    throw ConfigInvalid("unknown merge variant '" + name +
                        "' (expected shared-max, ind-max or ind-cat)");
  }
}

TrainResult train(const Dataset& dataset, const TrainOptions& options) {
  options.sgd.validate();
  MultiViewConfig net_config = options.network;
  net_config.n = dataset.n;
  net_config.k = dataset.k;
  net_config.classes = dataset.class_names.size();
  net_config.validate();

  if (dataset.records.empty()) throw ConfigInvalid("dataset is empty");
  const auto prepared = prepare_records(dataset);
  std::vector<std::size_t> train_idx = split_indices(prepared, Split::Train);
  const std::vector<std::size_t> test_idx = split_indices(prepared, Split::Test);
  if (train_idx.empty()) throw ConfigInvalid("dataset has no train records");
  if (test_idx.empty()) throw ConfigInvalid("dataset has no test records");

  TrainResult result{build_multiview_net<float>(net_config, options.seed), {}};
  MultiViewNetwork<float>& net = result.net;
  SgdOptimizer<float> optimizer(options.sgd);
  Rng shuffle_rng(options.seed ^ 0x53485546464CULL);

  TrainReport& report = result.report;
  report.class_names = dataset.class_names;
  report.merge_variant = variant_name(net_config);
  report.seed = options.seed;
  report.sgd = options.sgd;
  report.network = net_config;

  const std::size_t batch_size = static_cast<std::size_t>(options.sgd.batch_size);
  const std::size_t classes = net_config.classes;
  for (int epoch = 0; epoch < options.sgd.epochs; ++epoch) {
    // Seeded Fisher-Yates shuffle of the train order.
    for (std::size_t i = train_idx.size(); i > 1; --i) {
      std::swap(train_idx[i - 1], train_idx[shuffle_rng.below(i)]);
    }

    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t begin = 0; begin < train_idx.size(); begin += batch_size) {
      const std::size_t end = std::min(train_idx.size(), begin + batch_size);
      auto views = assemble_batch(prepared, train_idx, begin, end, net_config.n, net_config.k);
      std::vector<std::size_t> labels(end - begin);
      for (std::size_t b = 0; b < labels.size(); ++b) {
        labels[b] = prepared[train_idx[begin + b]].label;
      }

      const Tensor<float> logits = net.forward(views, true);
      auto loss = softmax_cross_entropy(logits, labels);
      loss_sum += static_cast<double>(loss.loss) * static_cast<double>(labels.size());
      for (std::size_t b = 0; b < labels.size(); ++b) {
        correct += argmax_row(logits, b) == labels[b];
      }
      net.backward(loss.grad_logits);
      multiview_sgd_step(net, optimizer, epoch);
    }

    EpochStats stats;
    stats.epoch = epoch + 1;
    stats.train_loss = loss_sum / static_cast<double>(train_idx.size());
    stats.train_accuracy =
        static_cast<double>(correct) / static_cast<double>(train_idx.size());
    const EvalResult test = evaluate_prepared(net, prepared, test_idx, classes, batch_size);
    stats.test_accuracy = test.accuracy;
    report.epochs.push_back(stats);
    if (epoch + 1 == options.sgd.epochs) {
      report.confusion = test.confusion;
      report.final_test_accuracy = test.accuracy;
    }
  }
  return result;
}

EvalResult evaluate(MultiViewNetwork<float>& net, const Dataset& dataset, Split split) {
  if (dataset.n != net.config.n || dataset.k != net.config.k ||
      dataset.class_names.size() != net.config.classes) {
    throw ShapeMismatch("checkpoint and dataset disagree on (n, k, classes)");
  }
  const auto prepared = prepare_records(dataset);
  const auto indices = split_indices(prepared, split);
  if (indices.empty()) throw ConfigInvalid("selected split is empty");
  return evaluate_prepared(net, prepared, indices, net.config.classes, 8);
}

namespace {

nlohmann::json config_json(const TrainReport& report) {
  return {
      {"merge_variant", report.merge_variant},
      {"seed", report.seed},
      {"epochs", report.sgd.epochs},
      {"batch_size", report.sgd.batch_size},
      {"learning_rate", report.sgd.learning_rate},
      {"momentum", report.sgd.momentum},
      {"decay_epoch", report.sgd.decay_epoch},
      {"decay_factor", report.sgd.decay_factor},
      {"n", report.network.n},
      {"k", report.network.k},
      {"conv_channels", report.network.conv_channels},
      {"fc_width", report.network.fc_width},
  };
}

}  // namespace

std::string report_to_json(const TrainReport& report) {
  nlohmann::json doc;
  doc["classes"] = report.class_names;
  doc["config"] = config_json(report);
  doc["epochs"] = nlohmann::json::array();
  for (const EpochStats& e : report.epochs) {
    doc["epochs"].push_back({{"epoch", e.epoch},
                             {"train_loss", e.train_loss},
                             {"train_accuracy", e.train_accuracy},
                             {"test_accuracy", e.test_accuracy}});
  }
  doc["final_test_accuracy"] = report.final_test_accuracy;
  doc["confusion_matrix"] = report.confusion;
  return doc.dump(2) + "\n";
}

std::string eval_to_json(const EvalResult& result, const std::vector<std::string>& class_names) {
  nlohmann::json doc;
  doc["classes"] = class_names;
  doc["accuracy"] = result.accuracy;
  doc["confusion_matrix"] = result.confusion;
  doc["samples"] = result.sample_count;
  return doc.dump(2) + "\n";
}

}  // namespace mlh
