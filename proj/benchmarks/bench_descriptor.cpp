#include <benchmark/benchmark.h>

#include "mlh/descriptor.hpp"
#include "mlh/rng.hpp"
#include "mlh/primitives.hpp"
#include "mlh/sampling.hpp"
#include "mlh/voxel.hpp"

using namespace mlh;

namespace {

TriangleMesh bench_mesh() {
  PrimitiveParams params;
  params.radius = 1.0;
  params.subdivisions = 4;
  return generate_primitive(PrimitiveKind::Sphere, params, 1);
}

void BM_SampleSurface(benchmark::State& state) {
  const TriangleMesh mesh = bench_mesh();
  const std::size_t count = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    PointCloud cloud = sample_surface(mesh, count, 7);
    benchmark::DoNotOptimize(cloud.points.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(count));
}
BENCHMARK(BM_SampleSurface)->Arg(40'960)->Arg(500'000);

void BM_ComputeMlh(benchmark::State& state) {
  const TriangleMesh mesh = bench_mesh();
  const auto n = static_cast<std::uint32_t>(state.range(0));
  const auto k = static_cast<std::uint32_t>(state.range(1));
  SamplingConfig config;
  const PointCloud cloud = sample_surface(mesh, required_point_count(n, k, config), 7);
  const PointCloud normalized = orient_and_normalize(cloud, ViewDirection::pos_z());
  for (auto _ : state) {
    MLHDescriptor desc = compute_mlh_from_normalized(normalized, n, k, ViewDirection::pos_z());
    benchmark::DoNotOptimize(desc.grid.data());
  }
  state.SetItemsProcessed(state.iterations() *
                          static_cast<std::int64_t>(normalized.points.size()));
}
BENCHMARK(BM_ComputeMlh)->Args({32, 5})->Args({256, 5});

void BM_VoxelizePoints(benchmark::State& state) {
  const TriangleMesh mesh = bench_mesh();
  const PointCloud cloud = sample_surface(mesh, 200'000, 7);
  const PointCloud normalized = orient_and_normalize(cloud, ViewDirection::pos_z());
  const auto r = static_cast<std::uint32_t>(state.range(0));
  for (auto _ : state) {
    VoxelGrid grid = voxelize_points(normalized, r);
    benchmark::DoNotOptimize(grid.counts.data());
  }
  state.SetItemsProcessed(state.iterations() *
                          static_cast<std::int64_t>(normalized.points.size()));
}
BENCHMARK(BM_VoxelizePoints)->Arg(16)->Arg(64);

void BM_Percentile(benchmark::State& state) {
  Rng rng(3);
  std::vector<double> values(static_cast<std::size_t>(state.range(0)));
  for (double& v : values) v = rng.uniform01();
  for (auto _ : state) {
    benchmark::DoNotOptimize(percentile(values, 0.37));
  }
}
BENCHMARK(BM_Percentile)->Arg(40)->Arg(4096);

}  // namespace

BENCHMARK_MAIN();
