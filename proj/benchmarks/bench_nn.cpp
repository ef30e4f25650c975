#include <benchmark/benchmark.h>

#include "mlh/gradcheck.hpp"
#include "mlh/multiview.hpp"
#include "mlh/rng.hpp"

using namespace mlh;

namespace {

Tensor<float> random_input(Rng& rng, std::vector<std::size_t> shape) {
  Tensor<float> t(std::move(shape));
  for (float& v : t.data) v = static_cast<float>(rng.uniform(-1.0, 1.0));
  return t;
}

void BM_Conv2dForward(benchmark::State& state) {
  Conv2D<float> conv(5, 32, 3, 3, 1, 1);
  Rng rng(1);
  conv.init(rng);
  const Tensor<float> x = random_input(rng, {8, 5, 32, 32});
  for (auto _ : state) {
    Tensor<float> y = conv.forward(x, true);
    benchmark::DoNotOptimize(y.data.data());
  }
}
BENCHMARK(BM_Conv2dForward);

void BM_Conv2dBackward(benchmark::State& state) {
  Conv2D<float> conv(5, 32, 3, 3, 1, 1);
  Rng rng(1);
  conv.init(rng);
  const Tensor<float> x = random_input(rng, {8, 5, 32, 32});
  const Tensor<float> y = conv.forward(x, true);
  const Tensor<float> gy = random_input(rng, y.shape);
  for (auto _ : state) {
    Tensor<float> gx = conv.backward(gy);
    benchmark::DoNotOptimize(gx.data.data());
  }
}
BENCHMARK(BM_Conv2dBackward);

void BM_MergeMax(benchmark::State& state) {
  Rng rng(2);
  const Tensor<float> a = random_input(rng, {8, 32, 4, 4});
  const Tensor<float> b = random_input(rng, {8, 32, 4, 4});
  const Tensor<float> c = random_input(rng, {8, 32, 4, 4});
  MaxMergeCache cache;
  for (auto _ : state) {
    Tensor<float> merged = merge_max<float>({&a, &b, &c}, &cache);
    benchmark::DoNotOptimize(merged.data.data());
  }
}
BENCHMARK(BM_MergeMax);

void BM_MergeConcatConv(benchmark::State& state) {
  Rng rng(3);
  const Tensor<float> a = random_input(rng, {8, 32, 4, 4});
  const Tensor<float> b = random_input(rng, {8, 32, 4, 4});
  const Tensor<float> c = random_input(rng, {8, 32, 4, 4});
  Conv2D<float> conv(96, 32, 3, 3, 1, 1);
  conv.init(rng);
  for (auto _ : state) {
    Tensor<float> merged = merge_concat_conv<float>({&a, &b, &c}, conv);
    benchmark::DoNotOptimize(merged.data.data());
  }
}
BENCHMARK(BM_MergeConcatConv);

void BM_MultiViewTrainStep(benchmark::State& state) {
  MultiViewConfig config;
  config.shared = false;
  config.merge = MergeKind::ConcatConv;
  config.classes = 4;
  config.n = 32;
  config.k = 5;
  auto net = build_multiview_net<float>(config, 5);
  SgdOptimizer<float> optimizer(SgdConfig{});

  Rng rng(6);
  std::array<Tensor<float>, 3> views = {random_input(rng, {8, 5, 32, 32}),
                                        random_input(rng, {8, 5, 32, 32}),
                                        random_input(rng, {8, 5, 32, 32})};
  const std::vector<std::size_t> labels = {0, 1, 2, 3, 0, 1, 2, 3};
  for (auto _ : state) {
    const Tensor<float> logits = net.forward(views, true);
    auto loss = softmax_cross_entropy(logits, labels);
    net.backward(loss.grad_logits);
    multiview_sgd_step(net, optimizer, 0);
    benchmark::DoNotOptimize(loss.loss);
  }
  state.SetItemsProcessed(state.iterations() * 8);
}
BENCHMARK(BM_MultiViewTrainStep);

}  // namespace

BENCHMARK_MAIN();
