// Acceptance suite: one line per criterion, nonzero exit if a gated
// criterion fails. Criterion 8 is reported but not gated (it compares mean
// accuracies of two stochastic trainings).

#include <chrono>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include "mlh/dataset.hpp"
#include "mlh/gradcheck.hpp"
#include "mlh/mesh_io.hpp"
#include "mlh/multiview.hpp"
#include "mlh/primitives.hpp"
#include "mlh/rng.hpp"
#include "mlh/serialize.hpp"
#include "mlh/train.hpp"
#include "mlh/voxel.hpp"

using namespace mlh;
using Clock = std::chrono::steady_clock;

namespace {

struct Gate {
  int passed = 0;
  int failed = 0;

  void report(int criterion, bool pass, const std::string& detail, double seconds,
              bool gated = true) {
    std::printf("criterion %2d: %s — %s (%.1f s)%s\n", criterion, pass ? "PASS" : "FAIL",
                detail.c_str(), seconds, gated ? "" : " [soft, not gated]");
    std::fflush(stdout);
    if (!gated) return;
    pass ? ++passed : ++failed;
  }
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

/// Tracks criterion 3 across every descriptor the suite produces.
struct DescriptorAudit {
  std::size_t checked = 0;
  std::size_t violations = 0;

  const MLHDescriptor& scan(const MLHDescriptor& desc) {
    ++checked;
    try {
      check_descriptor_invariants(desc);
    } catch (const Error&) {
      ++violations;
    }
    return desc;
  }
};

DescriptorAudit g_audit;

/// Random cloud in arbitrary units with degenerate cases mixed in.
PointCloud random_cloud(Rng& rng) {
  PointCloud cloud;
  const std::size_t count = 1 + rng.below(1500);
  const int style = static_cast<int>(rng.below(4));
  const double scale = rng.uniform(0.1, 20.0);
  const Vec3 offset{rng.uniform(-50, 50), rng.uniform(-50, 50), rng.uniform(-50, 50)};
  for (std::size_t i = 0; i < count; ++i) {
    Vec3 p{rng.uniform01(), rng.uniform01(), rng.uniform01()};
    if (style == 1) p.z = rng.below(2) ? 0.05 * p.z : 1.0 - 0.05 * p.z;  // two sheets
    if (style == 2) p.x = 0.5;                                           // plane
    if (style == 3) p = {p.x * p.x, p.y, 0.2 * p.z};                     // skewed
    cloud.points.push_back(offset + p * scale);
  }
  return cloud;
}

TriangleMesh random_shape(Rng& rng) {
  PrimitiveParams params;
  params.jitter = 0.01;
  const auto kind = static_cast<PrimitiveKind>(rng.below(4));
  switch (kind) {
    case PrimitiveKind::Box:
      params.extents = {rng.uniform(0.3, 2.0), rng.uniform(0.3, 2.0), rng.uniform(0.3, 2.0)};
      break;
    case PrimitiveKind::Sphere:
      params.radius = rng.uniform(0.3, 1.5);
      params.subdivisions = 2;
      break;
    case PrimitiveKind::Cylinder:
    case PrimitiveKind::Cone:
      params.radius = rng.uniform(0.3, 1.0);
      params.height = rng.uniform(0.5, 2.5);
      params.segments = 16;
      break;
  }
  return generate_primitive(kind, params, rng.next_u64());
}

// --- criterion 1 -----------------------------------------------------------

bool criterion_1(Gate& gate) {
  const auto start = Clock::now();
  Rng rng(1001);
  const std::uint32_t n = 16;
  double worst = 0.0;
  std::size_t occupancy_failures = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const PointCloud normalized = orient_and_normalize(random_cloud(rng), ViewDirection::pos_z());
    const VoxelGrid grid = voxelize_points(normalized, n);
    for (std::uint32_t k : {1u, 2u, 5u}) {
      const MLHDescriptor desc =
          g_audit.scan(compute_mlh_from_normalized(normalized, n, k, ViewDirection::pos_z()));
      if (!occupancy_matches(desc, grid)) ++occupancy_failures;
      worst = std::max(worst, max_entrywise_deviation(desc, mlh_from_voxels(grid, k)));
    }
  }
  const double bound = 1.0 / n;
  const bool pass = occupancy_failures == 0 && worst <= bound;
  char detail[160];
  std::snprintf(detail, sizeof(detail),
                "1000 clouds x k in {1,2,5} at N=R=%u: occupancy mismatches %zu, "
                "max |desc - oracle| %.6f <= %.6f",
                n, occupancy_failures, worst, bound);
  gate.report(1, pass, detail, seconds_since(start));
  return pass;
}

// --- criterion 2 -----------------------------------------------------------

bool criterion_2(Gate& gate) {
  const auto start = Clock::now();
  Rng rng(2002);
  const std::uint32_t n = 16;
  std::size_t mismatches = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const TriangleMesh mesh = random_shape(rng);
    SamplingConfig config;
    const PointCloud cloud =
        sample_surface(mesh, required_point_count(n, 5, config), rng.next_u64());
    const ViewDirection views[3] = {ViewDirection::pos_x(), ViewDirection::pos_y(),
                                    ViewDirection::pos_z()};
    const ViewDirection& view = views[trial % 3];
    const PointCloud normalized = orient_and_normalize(cloud, view);
    const MLHDescriptor depth =
        g_audit.scan(compute_mlh_from_normalized(normalized, n, 1, view));
    for (std::uint32_t k : {2u, 3u, 5u}) {
      const MLHDescriptor deep = g_audit.scan(compute_mlh_from_normalized(normalized, n, k, view));
      for (std::uint32_t p = 0; p < n; ++p) {
        for (std::uint32_t q = 0; q < n; ++q) {
          if (deep.at(p, q, 0) != depth.at(p, q, 0)) ++mismatches;
        }
      }
    }
  }
  char detail[160];
  std::snprintf(detail, sizeof(detail),
                "200 shapes, layer 1 of k in {2,3,5} vs the k=1 depth map: %zu bitwise mismatches",
                mismatches);
  gate.report(2, mismatches == 0, detail, seconds_since(start));
  return mismatches == 0;
}

// --- criterion 4 -----------------------------------------------------------

double weighted_sum(const Tensor<double>& y, const Tensor<double>& weights) {
  return dot_lanes(y.data.data(), weights.data.data(), y.numel());
}

Tensor<double> loss_weights(Rng& rng, const std::vector<std::size_t>& shape) {
  Tensor<double> w(shape);
  for (double& v : w.data) v = (rng.below(2) ? 1.0 : -1.0) * rng.uniform(0.5, 1.5);
  return w;
}

/// Central differences of a weighted-sum readout against the analytic
/// gradients of one layer. Checks every parameter and the input.
struct LayerCheck {
  double max_rel_error = 0.0;
  std::size_t checked = 0;

  void tensor(const std::function<double()>& loss, Tensor<double>& theta,
              const Tensor<double>& analytic, double eps) {
    for (std::size_t i = 0; i < theta.numel(); ++i) {
      const double saved = theta[i];
      theta[i] = saved + eps;
      const double plus = loss();
      theta[i] = saved - eps;
      const double minus = loss();
      theta[i] = saved;
      const double numeric = (plus - minus) / (2.0 * eps);
      const double a = analytic[i];
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-12});
      max_rel_error = std::max(max_rel_error, std::abs(a - numeric) / denom);
      ++checked;
    }
  }

  void layer(Layer<double>& l, Tensor<double> input, Rng& rng, double param_eps,
             double input_eps) {
    const Tensor<double> out = l.forward(input, true);
    const Tensor<double> weights = loss_weights(rng, out.shape);
    const Tensor<double> input_grad = l.backward(weights);
    std::vector<Tensor<double>> analytic;
    for (Tensor<double>* g : l.grads()) analytic.push_back(*g);

    const std::function<double()> loss = [&]() {
      return weighted_sum(l.forward(input, true), weights);
    };
    auto params = l.params();
    for (std::size_t i = 0; i < params.size(); ++i) {
      tensor(loss, *params[i], analytic[i], param_eps);
    }
    tensor(loss, input, input_grad, input_eps);
  }
};

Tensor<double> uniform_tensor(Rng& rng, std::vector<std::size_t> shape, double lo, double hi) {
  Tensor<double> t(std::move(shape));
  for (double& v : t.data) v = rng.uniform(lo, hi);
  return t;
}

/// Values bounded away from the ReLU kink on both sides.
Tensor<double> signed_tensor(Rng& rng, std::vector<std::size_t> shape) {
  Tensor<double> t(std::move(shape));
  for (double& v : t.data) v = (rng.below(2) ? 1.0 : -1.0) * rng.uniform(0.3, 1.3);
  return t;
}

/// 2x2 pooling windows with a minimum gap so an eps step cannot flip the max.
Tensor<double> separated_tensor(Rng& rng, std::size_t ch, std::size_t h, std::size_t w) {
  Tensor<double> t({1, ch, h, w});
  for (std::size_t c = 0; c < ch; ++c) {
    for (std::size_t oy = 0; oy < h / 2; ++oy) {
      for (std::size_t ox = 0; ox < w / 2; ++ox) {
        double v[4];
        bool ok = false;
        while (!ok) {
          for (double& x : v) x = rng.uniform01();
          ok = true;
          for (int a = 0; a < 4 && ok; ++a) {
            for (int b = a + 1; b < 4; ++b) {
              if (std::abs(v[a] - v[b]) < 1e-2) {
                ok = false;
                break;
              }
            }
          }
        }
        t.at4(0, c, 2 * oy, 2 * ox) = v[0];
        t.at4(0, c, 2 * oy, 2 * ox + 1) = v[1];
        t.at4(0, c, 2 * oy + 1, 2 * ox) = v[2];
        t.at4(0, c, 2 * oy + 1, 2 * ox + 1) = v[3];
      }
    }
  }
  return t;
}

bool criterion_4(Gate& gate) {
  const auto start = Clock::now();
  LayerCheck check;

  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(4000 + seed);

    {  // convolution: linear in weights, bias and input -> wide eps
      Conv2D<double> conv(2, 3, 3, 3, 1, 1);
      conv.init(rng);
      check.layer(conv, uniform_tensor(rng, {1, 2, 6, 6}, -1, 1), rng, 1e-2, 1e-2);
    }
    {  // strided convolution
      Conv2D<double> conv(2, 2, 3, 3, 2, 1);
      conv.init(rng);
      check.layer(conv, uniform_tensor(rng, {1, 2, 7, 7}, -1, 1), rng, 1e-2, 1e-2);
    }
    {  // linear
      Linear<double> fc(6, 4);
      fc.init(rng);
      check.layer(fc, uniform_tensor(rng, {2, 6}, -1, 1), rng, 1e-2, 1e-2);
    }
    {  // relu: piecewise linear, inputs bounded away from the kink
      ReLU<double> relu;
      check.layer(relu, signed_tensor(rng, {1, 40}), rng, 1e-4, 1e-4);
    }
    {  // maxpool: windows separated so eps cannot flip the argmax
      MaxPool2x2<double> pool;
      check.layer(pool, separated_tensor(rng, 2, 6, 6), rng, 1e-4, 1e-4);
    }
    {  // batchnorm: linear in gamma/beta; the input side is genuinely smooth
      BatchNorm2D<double> bn(3);
      for (double& v : bn.gamma.data) v = (rng.below(2) ? 1.0 : -1.0) * rng.uniform(0.5, 1.5);
      for (double& v : bn.beta.data) v = rng.uniform(-1, 1);
      check.layer(bn, uniform_tensor(rng, {2, 3, 4, 4}, -1, 1), rng, 1e-2, 1e-5);
    }
    {  // softmax cross entropy on its own logits
      Tensor<double> logits = uniform_tensor(rng, {3, 5}, -2, 2);
      std::vector<std::size_t> labels = {rng.below(5), rng.below(5), rng.below(5)};
      const auto base = softmax_cross_entropy(logits, labels);
      const std::function<double()> loss = [&]() {
        return softmax_cross_entropy(logits, labels).loss;
      };
      check.tensor(loss, logits, base.grad_logits, 1e-5);
    }
    {  // element-wise max merge with separated views
      std::array<Tensor<double>, 3> views;
      Tensor<double> stacked = separated_tensor(rng, 3, 4, 4);  // borrow the separation rule
      for (std::size_t v = 0; v < 3; ++v) {
        views[v] = Tensor<double>({1, 1, 4, 4});
        // One channel per view; separation within the stacked tensor windows
        // is reused across views so the element-wise gaps stay > 1e-2.
        for (std::size_t i = 0; i < 16; ++i) views[v][i] = stacked[v * 16 + i];
      }
      MaxMergeCache cache;
      const Tensor<double> merged = merge_max<double>({&views[0], &views[1], &views[2]}, &cache);
      const Tensor<double> weights = loss_weights(rng, merged.shape);
      const auto analytic = merge_max_backward(weights, cache);
      const std::function<double()> loss = [&]() {
        const Tensor<double> m = merge_max<double>({&views[0], &views[1], &views[2]});
        return weighted_sum(m, weights);
      };
      for (std::size_t v = 0; v < 3; ++v) check.tensor(loss, views[v], analytic[v], 1e-4);
    }
    {  // concat + conv merge: linear end to end
      std::array<Tensor<double>, 3> views = {uniform_tensor(rng, {1, 2, 4, 4}, -1, 1),
                                             uniform_tensor(rng, {1, 2, 4, 4}, -1, 1),
                                             uniform_tensor(rng, {1, 2, 4, 4}, -1, 1)};
      Conv2D<double> conv(6, 2, 3, 3, 1, 1);
      conv.init(rng);
      const std::array<const Tensor<double>*, 3> ptrs = {&views[0], &views[1], &views[2]};
      const Tensor<double> merged = merge_concat_conv(ptrs, conv);
      const Tensor<double> weights = loss_weights(rng, merged.shape);
      const auto split = split_channels(conv.backward(weights));
      const Tensor<double> analytic_w = conv.grad_weight;
      const Tensor<double> analytic_b = conv.grad_bias;
      const std::function<double()> loss = [&]() {
        return weighted_sum(merge_concat_conv(ptrs, conv), weights);
      };
      check.tensor(loss, conv.weight, analytic_w, 1e-2);
      check.tensor(loss, conv.bias, analytic_b, 1e-2);
      for (std::size_t v = 0; v < 3; ++v) check.tensor(loss, views[v], split[v], 1e-2);
    }
  }

  // Negative control: a corrupted backward must be detected loudly.
  double control_error = 0.0;
  {
    Rng rng(4999);
    Conv2D<double> conv(2, 3, 3, 3, 1, 1);
    conv.init(rng);
    Tensor<double> input = uniform_tensor(rng, {1, 2, 6, 6}, -1, 1);
    const Tensor<double> out = conv.forward(input, true);
    const Tensor<double> weights = loss_weights(rng, out.shape);
    conv.backward(weights);
    Tensor<double> corrupted = conv.grad_weight;
    for (double& v : corrupted.data) v = -v;  // injected sign flip
    LayerCheck control;
    const std::function<double()> loss = [&]() {
      return weighted_sum(conv.forward(input, true), weights);
    };
    control.tensor(loss, conv.weight, corrupted, 1e-2);
    control_error = control.max_rel_error;
  }

  const bool pass = check.max_rel_error < 1e-6 && control_error > 1e-1;
  char detail[200];
  std::snprintf(detail, sizeof(detail),
                "100 seeds, %zu gradient components across every layer and both merges: "
                "max rel error %.3e < 1e-6; injected-fault control %.2f > 0.1",
                check.checked, check.max_rel_error, control_error);
  gate.report(4, pass, detail, seconds_since(start));
  return pass;
}

// --- criterion 5 -----------------------------------------------------------

bool criterion_5(Gate& gate) {
  const auto start = Clock::now();
  Rng rng(5005);
  double min_swap_delta = 1e300;
  double max_symmetric_delta = 0.0;
  for (int draw = 0; draw < 50; ++draw) {
    const std::size_t depth = 3;
    std::array<Tensor<double>, 3> views = {uniform_tensor(rng, {1, depth, 5, 5}, -1, 1),
                                           uniform_tensor(rng, {1, depth, 5, 5}, -1, 1),
                                           uniform_tensor(rng, {1, depth, 5, 5}, -1, 1)};
    Conv2D<double> conv(3 * depth, depth, 3, 3, 1, 1);
    conv.init(rng);
    const Tensor<double> ordered =
        merge_concat_conv<double>({&views[0], &views[1], &views[2]}, conv);
    const Tensor<double> swapped =
        merge_concat_conv<double>({&views[1], &views[0], &views[2]}, conv);
    double delta = 0.0;
    for (std::size_t i = 0; i < ordered.numel(); ++i) {
      delta = std::max(delta, std::abs(ordered[i] - swapped[i]));
    }
    min_swap_delta = std::min(min_swap_delta, delta);

    // Symmetric construction: identical weights per view group.
    Conv2D<double> symmetric(3 * depth, depth, 3, 3, 1, 1);
    const Tensor<double> group = uniform_tensor(rng, {depth, depth, 3, 3}, -1, 1);
    for (std::size_t f = 0; f < depth; ++f) {
      for (std::size_t g = 0; g < 3; ++g) {
        for (std::size_t c = 0; c < depth; ++c) {
          for (std::size_t t = 0; t < 9; ++t) {
            symmetric.weight[((f * 3 * depth) + g * depth + c) * 9 + t] =
                group[(f * depth + c) * 9 + t];
          }
        }
      }
    }
    const Tensor<double> sym_a =
        merge_concat_conv<double>({&views[0], &views[1], &views[2]}, symmetric);
    const Tensor<double> sym_b =
        merge_concat_conv<double>({&views[2], &views[0], &views[1]}, symmetric);
    const Tensor<double> sym_c =
        merge_concat_conv<double>({&views[1], &views[2], &views[0]}, symmetric);
    for (std::size_t i = 0; i < sym_a.numel(); ++i) {
      max_symmetric_delta = std::max(max_symmetric_delta, std::abs(sym_a[i] - sym_b[i]));
      max_symmetric_delta = std::max(max_symmetric_delta, std::abs(sym_a[i] - sym_c[i]));
    }
  }
  const bool pass = min_swap_delta > 1e-6 && max_symmetric_delta < 1e-12;
  char detail[200];
  std::snprintf(detail, sizeof(detail),
                "50 weight draws: min branch-swap |delta| %.3e > 1e-6; "
                "symmetric weights permute within %.3e < 1e-12",
                min_swap_delta, max_symmetric_delta);
  gate.report(5, pass, detail, seconds_since(start));
  return pass;
}

// --- criterion 6 -----------------------------------------------------------

bool criterion_6(Gate& gate) {
  const auto start = Clock::now();
  bool scalar_ok = false;
  {
    Tensor<double> w3({1, 3, 1, 1}, {1.0, 2.0, 3.0});
    const Tensor<double> w5 = expand_input_weights(w3, 5);
    scalar_ok = w5.data == std::vector<double>{1.0, 2.0, 2.0, 2.0, 3.0};
  }

  double worst_identity = 0.0;
  Rng rng(6006);
  for (int draw = 0; draw < 20; ++draw) {
    const std::size_t filters = 3;
    const Tensor<double> w3 = uniform_tensor(rng, {filters, 3, 3, 3}, -1, 1);
    const Tensor<double> w5 = expand_input_weights(w3, 5);
    Conv2D<double> conv3(3, filters, 3, 3, 1, 1);
    Conv2D<double> conv5(5, filters, 3, 3, 1, 1);
    conv3.weight = w3;
    conv5.weight = w5;

    const Tensor<double> map = uniform_tensor(rng, {1, 1, 5, 5}, -1, 1);
    Tensor<double> x3({1, 3, 5, 5}), x5({1, 5, 5, 5});
    for (std::size_t c = 0; c < 3; ++c) {
      std::copy(map.data.begin(), map.data.end(), x3.data.begin() + c * 25);
    }
    for (std::size_t c = 0; c < 5; ++c) {
      std::copy(map.data.begin(), map.data.end(), x5.data.begin() + c * 25);
    }
    const Tensor<double> y3 = conv3.forward(x3, true);
    const Tensor<double> y5 = conv5.forward(x5, true);
    for (std::size_t i = 0; i < y3.numel(); ++i) {
      worst_identity = std::max(worst_identity, std::abs(y5[i] / 5.0 - y3[i] / 3.0));
    }
  }
  const bool pass = scalar_ok && worst_identity < 1e-12;
  char detail[160];
  std::snprintf(detail, sizeof(detail),
                "scalar rule (1,2,3)->(1,2,2,2,3) %s; channel-constant mean-response identity "
                "within %.3e < 1e-12",
                scalar_ok ? "exact" : "WRONG", worst_identity);
  gate.report(6, pass, detail, seconds_since(start));
  return pass;
}

// --- criteria 7, 8, 9 ------------------------------------------------------

struct BenchmarkRuns {
  Dataset dataset;
  TrainReport cat_seed1;
  std::string cat_seed1_json;
  std::vector<double> cat_accuracies;
  std::vector<double> max_accuracies;
};

TrainOptions benchmark_options(const std::string& variant, std::uint64_t seed) {
  TrainOptions options;
  apply_variant(options.network, variant);
  options.sgd = SgdConfig{};  // 20 epochs, batch 8, lr 0.01, x0.1 at epoch 10
  options.seed = seed;
  return options;
}

bool criterion_7_8_9(Gate& gate, bool run_variant_sweep) {
  auto start = Clock::now();
  BenchmarkRuns runs;
  runs.dataset = build_synthetic_dataset(4, 200, 32, 5, 1);
  for (const auto& record : runs.dataset.records) {
    for (const auto& view : record.bundle.views) g_audit.scan(view);
  }
  const double dataset_seconds = seconds_since(start);

  // Criterion 7: the default schedule on the independent + cat-merge design.
  start = Clock::now();
  TrainResult first = train(runs.dataset, benchmark_options("ind-cat", 1));
  const double train_seconds = seconds_since(start);
  runs.cat_seed1 = first.report;
  runs.cat_seed1_json = report_to_json(first.report);
  runs.cat_accuracies.push_back(first.report.final_test_accuracy);
  {
    const bool pass =
        first.report.final_test_accuracy >= 0.90 && train_seconds + dataset_seconds < 900.0;
    char detail[200];
    std::snprintf(detail, sizeof(detail),
                  "ind-cat, 4x200 shapes at N=32 k=5 seed 1, 20 epochs batch 8: "
                  "test accuracy %.4f >= 0.90 (dataset %.0f s + training %.0f s < 900 s)",
                  first.report.final_test_accuracy, dataset_seconds, train_seconds);
    gate.report(7, pass, detail, dataset_seconds + train_seconds);
  }

  // Criterion 9: byte-identical rerun.
  start = Clock::now();
  {
    TrainResult second = train(runs.dataset, benchmark_options("ind-cat", 1));
    const bool report_same = report_to_json(second.report) == runs.cat_seed1_json;
    const bool ckpt_same = encode_checkpoint(second.net) == encode_checkpoint(first.net);
    char detail[160];
    std::snprintf(detail, sizeof(detail), "repeat of criterion 7: report %s, checkpoint %s",
                  report_same ? "byte-identical" : "DIFFERS",
                  ckpt_same ? "byte-identical" : "DIFFERS");
    gate.report(9, report_same && ckpt_same, detail, seconds_since(start));
  }

  // Criterion 8 (soft): mean accuracy of ind-cat vs ind-max over 5 seeds.
  start = Clock::now();
  if (run_variant_sweep) {
    for (std::uint64_t seed = 2; seed <= 5; ++seed) {
      runs.cat_accuracies.push_back(
          train(runs.dataset, benchmark_options("ind-cat", seed)).report.final_test_accuracy);
    }
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      runs.max_accuracies.push_back(
          train(runs.dataset, benchmark_options("ind-max", seed)).report.final_test_accuracy);
    }
    double cat_mean = 0.0, max_mean = 0.0;
    for (double a : runs.cat_accuracies) cat_mean += a;
    for (double a : runs.max_accuracies) max_mean += a;
    cat_mean /= static_cast<double>(runs.cat_accuracies.size());
    max_mean /= static_cast<double>(runs.max_accuracies.size());
    char detail[200];
    std::snprintf(detail, sizeof(detail),
                  "mean test accuracy over 5 seeds: ind-cat %.4f vs ind-max %.4f "
                  "(require cat >= max - 0.02)",
                  cat_mean, max_mean);
    gate.report(8, cat_mean >= max_mean - 0.02, detail, seconds_since(start),
                /*gated=*/false);
  } else {
    gate.report(8, true, "skipped (--skip-variant-sweep)", 0.0, /*gated=*/false);
  }
  return true;
}

// --- criterion 10 ----------------------------------------------------------

MLHDescriptor random_descriptor(Rng& rng) {
  MLHDescriptor desc;
  desc.n = 1 + static_cast<std::uint32_t>(rng.below(10));
  desc.k = 1 + static_cast<std::uint32_t>(rng.below(6));
  switch (rng.below(4)) {
    case 0: desc.view = ViewDirection::pos_x(); break;
    case 1: desc.view = ViewDirection::pos_y(); break;
    case 2: desc.view = ViewDirection::pos_z(); break;
    default: {
      Vec3 normal{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
      desc.view = view_from_normal(normal / norm(normal));
      break;
    }
  }
  desc.grid.resize(static_cast<std::size_t>(desc.n) * desc.n * desc.k);
  for (std::uint32_t p = 0; p < desc.n; ++p) {
    for (std::uint32_t q = 0; q < desc.n; ++q) {
      float* bin = desc.grid.data() + (static_cast<std::size_t>(p) * desc.n + q) * desc.k;
      if (rng.below(4) == 0) {
        for (std::uint32_t i = 0; i < desc.k; ++i) bin[i] = MLHDescriptor::kEmpty;
        continue;
      }
      double h = rng.uniform01();
      for (std::uint32_t i = 0; i < desc.k; ++i) {
        bin[i] = static_cast<float>(h);
        h += rng.uniform01() * (1.0 - h);
      }
    }
  }
  return desc;
}

bool criterion_10(Gate& gate) {
  const auto start = Clock::now();
  Rng rng(10010);
  std::size_t descriptor_failures = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const MLHDescriptor desc = random_descriptor(rng);
    const auto bytes = encode_descriptor(desc);
    const MLHDescriptor decoded = decode_descriptor(bytes);
    // write -> read -> write must reproduce the file bytes, and a further
    // read -> write cycle must be a fixed point.
    if (encode_descriptor(decoded) != bytes) ++descriptor_failures;
    if (decode_descriptor(encode_descriptor(decoded)) != decoded) ++descriptor_failures;
    if (decoded.grid != desc.grid || decoded.n != desc.n || decoded.k != desc.k) {
      ++descriptor_failures;
    }
  }

  std::size_t checkpoint_failures = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    MultiViewConfig config;
    config.shared = seed % 2 == 0;
    config.merge = seed % 3 == 0 ? MergeKind::ElementwiseMax : MergeKind::ConcatConv;
    config.classes = 2 + seed % 4;
    config.n = 8 * (1 + seed % 3);
    config.k = 1 + seed % 5;
    config.conv_channels = 2 + seed % 6;
    config.fc_width = 4 + seed;
    auto net = build_multiview_net<float>(config, seed);
    const auto bytes = encode_checkpoint(net);
    auto decoded = decode_checkpoint(bytes);
    if (encode_checkpoint(decoded) != bytes) ++checkpoint_failures;
    auto a = net.state();
    auto b = decoded.state();
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (!(*a[i] == *b[i])) ++checkpoint_failures;
    }
  }
  const bool pass = descriptor_failures == 0 && checkpoint_failures == 0;
  char detail[160];
  std::snprintf(detail, sizeof(detail),
                "1000 descriptors and 10 checkpoints: %zu + %zu round-trip failures",
                descriptor_failures, checkpoint_failures);
  gate.report(10, pass, detail, seconds_since(start));
  return pass;
}

}  // namespace

int main(int argc, char** argv) {
  bool run_variant_sweep = true;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--skip-variant-sweep") == 0) run_variant_sweep = false;
  }

  Gate gate;
  criterion_1(gate);
  criterion_2(gate);
  criterion_4(gate);
  criterion_5(gate);
  criterion_6(gate);
  criterion_7_8_9(gate, run_variant_sweep);
  criterion_10(gate);

  {  // criterion 3 covers every descriptor produced above
    char detail[160];
    std::snprintf(detail, sizeof(detail),
                  "layer monotonicity and sentinel exclusivity on %zu descriptors: "
                  "%zu violations",
                  g_audit.checked, g_audit.violations);
    gate.report(3, g_audit.violations == 0, detail, 0.0);
  }

  std::printf("%d gated criteria passed, %d failed\n", gate.passed, gate.failed);
  return gate.failed == 0 ? 0 : 1;
}
