#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "mlh/descriptor.hpp"
#include "mlh/errors.hpp"
#include "mlh/image.hpp"
#include "mlh/primitives.hpp"
#include "mlh/voxel.hpp"

using namespace mlh;

TEST_CASE("percentile interpolates between order statistics") {
  const std::vector<double> two = {0.0, 1.0};
  CHECK(percentile(two, 0.0) == 0.0);
  CHECK(percentile(two, 0.25) == 0.25);
  CHECK(percentile(two, 0.5) == 0.5);
  CHECK(percentile(two, 0.75) == 0.75);
  CHECK(percentile(two, 1.0) == 1.0);

  const std::vector<double> single = {0.42};
  for (double f : {0.0, 0.3, 1.0}) CHECK(percentile(single, f) == 0.42);

  const std::vector<double> unsorted = {0.3, 0.1, 0.2};
  CHECK(percentile(unsorted, 0.5) == 0.2);

  CHECK_THROWS_AS(percentile(std::vector<double>{}, 0.5), EmptyList);
}

TEST_CASE("orient_and_normalize canonical views") {
  SUBCASE("single point collapses to the origin") {
    PointCloud cloud;
    cloud.points = {{3.7, -1.2, 9.9}};
    const PointCloud out = orient_and_normalize(cloud, ViewDirection::pos_z());
    CHECK(out.points[0] == Vec3{0, 0, 0});
  }

  SUBCASE("box corners land on the unit cube corners") {
    PointCloud cloud;
    for (double x : {-1.0, 1.0}) {
      for (double y : {-1.0, 1.0}) {
        for (double z : {-1.0, 1.0}) cloud.points.push_back({x, y, z});
      }
    }
    const PointCloud out = orient_and_normalize(cloud, ViewDirection::pos_z());
    for (const Vec3& p : out.points) {
      CHECK((p.x == 0.0 || p.x == 1.0));
      CHECK((p.y == 0.0 || p.y == 1.0));
      CHECK((p.z == 0.0 || p.z == 1.0));
    }
  }

  SUBCASE("PosX cycles axes then scales by the max extent") {
    PointCloud cloud;
    cloud.points = {{0, 0, 0}, {2, 1, 1}};
    const PointCloud out = orient_and_normalize(cloud, ViewDirection::pos_x());
    CHECK(out.points[0] == Vec3{0, 0, 0});
    CHECK(out.points[1] == Vec3{0.5, 0.5, 1.0});
  }

  SUBCASE("empty cloud throws") {
    CHECK_THROWS_AS(orient_and_normalize(PointCloud{}, ViewDirection::pos_z()), EmptyCloud);
  }
}

TEST_CASE("view rotations map the chosen axis to +Z") {
  CHECK(ViewDirection::pos_x().rotate({1, 0, 0}) == Vec3{0, 0, 1});
  CHECK(ViewDirection::pos_y().rotate({0, 1, 0}) == Vec3{0, 0, 1});
  CHECK(ViewDirection::pos_z().rotate({0, 0, 1}) == Vec3{0, 0, 1});
  // Right-handed cycles keep orientation.
  CHECK(ViewDirection::pos_x().rotate({0, 1, 0}) == Vec3{1, 0, 0});
  CHECK(ViewDirection::pos_y().rotate({0, 0, 1}) == Vec3{1, 0, 0});
}

TEST_CASE("custom views validate their basis") {
  const Vec3 n{0, 0, 1}, u{1, 0, 0}, v{0, 1, 0};
  CHECK(ViewDirection::custom(n, u, v).rotate({1, 2, 3}) == Vec3{1, 2, 3});
  CHECK_THROWS_AS(ViewDirection::custom({0, 0, 2}, u, v), InvalidParams);
  CHECK_THROWS_AS(ViewDirection::custom(n, u, {1, 0, 0}), InvalidParams);
  CHECK_THROWS_AS(ViewDirection::custom(n, {0, 1, 0}, {1, 0, 0}), InvalidParams);  // left-handed
}

TEST_CASE("compute_mlh_from_normalized bin rules") {
  SUBCASE("untouched bins hold the 1.2 sentinel in every layer") {
    PointCloud cloud;
    cloud.points = {{0.1, 0.1, 0.4}};
    const MLHDescriptor desc = compute_mlh_from_normalized(cloud, 4, 3, ViewDirection::pos_z());
    CHECK_FALSE(desc.bin_empty(0, 0));
    for (std::uint32_t layer = 0; layer < 3; ++layer) {
      CHECK(desc.at(3, 3, layer) == MLHDescriptor::kEmpty);
      CHECK(desc.at(1, 2, layer) == MLHDescriptor::kEmpty);
    }
  }

  SUBCASE("k = 1 stores the bin minimum") {
    PointCloud cloud;
    cloud.points = {{0.1, 0.1, 0.2}, {0.1, 0.1, 0.7}};
    const MLHDescriptor desc = compute_mlh_from_normalized(cloud, 4, 1, ViewDirection::pos_z());
    CHECK(desc.at(0, 0, 0) == 0.2f);
  }

  SUBCASE("k = 5 percentiles of {0, 1}") {
    PointCloud cloud;
    cloud.points = {{0.1, 0.1, 0.0}, {0.1, 0.1, 1.0}};
    const MLHDescriptor desc = compute_mlh_from_normalized(cloud, 4, 5, ViewDirection::pos_z());
    const float expected[5] = {0.0f, 0.25f, 0.5f, 0.75f, 1.0f};
    for (std::uint32_t layer = 0; layer < 5; ++layer) {
      CHECK(desc.at(0, 0, layer) == expected[layer]);
    }
  }

  SUBCASE("boundary coordinate 1.0 lands in the last bin") {
    PointCloud cloud;
    cloud.points = {{1.0, 1.0, 0.3}};
    const MLHDescriptor desc = compute_mlh_from_normalized(cloud, 8, 1, ViewDirection::pos_z());
    CHECK_FALSE(desc.bin_empty(7, 7));
  }

  SUBCASE("out-of-range points are rejected") {
    PointCloud cloud;
    cloud.points = {{1.5, 0.5, 0.5}};
    CHECK_THROWS_AS(compute_mlh_from_normalized(cloud, 4, 1, ViewDirection::pos_z()),
                    PointOutOfRange);
  }
}

TEST_CASE("dense cube descriptor is [0, 1] everywhere and matches the voxel oracle") {
  // Dense enough that every R = 64 oracle column sees both cube faces.
  const PointCloud cloud = sample_surface(testing::cube_mesh(), 2'000'000, 13);
  const PointCloud normalized = orient_and_normalize(cloud, ViewDirection::pos_z());
  const MLHDescriptor desc = compute_mlh_from_normalized(normalized, 8, 2, ViewDirection::pos_z());

  for (std::uint32_t p = 0; p < 8; ++p) {
    for (std::uint32_t q = 0; q < 8; ++q) {
      REQUIRE_FALSE(desc.bin_empty(p, q));
      CHECK(desc.at(p, q, 0) == 0.0f);  // bottom face
      CHECK(desc.at(p, q, 1) == 1.0f);  // top face
    }
  }

  // Same-resolution oracle agrees within the quantization bound.
  const VoxelGrid grid8 = voxelize_points(normalized, 8);
  CHECK(occupancy_matches(desc, grid8));
  CHECK(max_entrywise_deviation(desc, mlh_from_voxels(grid8, 2)) <= 1.0 / 8.0);

  // A finer oracle pins every occupied column near {0, 1} too.
  const VoxelGrid grid64 = voxelize_points(normalized, 64);
  const MLHDescriptor oracle64 = mlh_from_voxels(grid64, 2);
  for (std::uint32_t p = 0; p < 64; ++p) {
    for (std::uint32_t q = 0; q < 64; ++q) {
      if (oracle64.bin_empty(p, q)) continue;
      CHECK(std::abs(oracle64.at(p, q, 0) - 0.0f) <= 1.0f / 64.0f);
      CHECK(std::abs(oracle64.at(p, q, 1) - 1.0f) <= 1.0f / 64.0f);
    }
  }
}

TEST_CASE("compute_bundle is deterministic and shares one cloud") {
  SamplingConfig config;
  config.rng_seed = 77;
  config.oversample_factor = 800;  // every bin must see both cube faces
  const TriangleMesh cube = testing::cube_mesh();
  const MultiViewBundle a = compute_bundle(cube, 8, 2, config);
  const MultiViewBundle b = compute_bundle(cube, 8, 2, config);
  CHECK(a == b);

  // The cube is symmetric under the axis cycles, so all three k = 2 views
  // coincide exactly: every bin sees the full [0, 1] height range.
  CHECK(a.views[0].grid == a.views[1].grid);
  CHECK(a.views[1].grid == a.views[2].grid);
}

TEST_CASE("sphere views agree statistically") {
  PrimitiveParams params;
  params.radius = 1.0;
  params.subdivisions = 4;
  const TriangleMesh sphere = generate_primitive(PrimitiveKind::Sphere, params, 0);
  const PointCloud cloud = sample_surface(sphere, 1'000'000, 31);

  const MLHDescriptor views[3] = {
      compute_mlh(cloud, 16, 5, ViewDirection::pos_x()),
      compute_mlh(cloud, 16, 5, ViewDirection::pos_y()),
      compute_mlh(cloud, 16, 5, ViewDirection::pos_z()),
  };
  // Every column of a closed surface holds two height clusters (bottom and
  // top cap). The extremal and quartile layers are stable order statistics;
  // the median layer interpolates across the interior gap and flips between
  // the caps on sample-count fluctuations, so it gets a coarse bound only.
  for (int a = 0; a < 3; ++a) {
    const MLHDescriptor& lhs = views[a];
    const MLHDescriptor& rhs = views[(a + 1) % 3];
    double stable_total = 0.0, median_total = 0.0;
    std::size_t stable_count = 0, median_count = 0;
    for (std::uint32_t p = 0; p < 16; ++p) {
      for (std::uint32_t q = 0; q < 16; ++q) {
        if (lhs.bin_empty(p, q) || rhs.bin_empty(p, q)) continue;
        for (std::uint32_t layer = 0; layer < 5; ++layer) {
          const double delta =
              std::abs(static_cast<double>(lhs.at(p, q, layer)) - rhs.at(p, q, layer));
          if (layer == 2) {
            median_total += delta;
            ++median_count;
          } else {
            stable_total += delta;
            ++stable_count;
          }
        }
      }
    }
    REQUIRE(stable_count > 0);
    CHECK(stable_total / static_cast<double>(stable_count) < 0.02);
    CHECK(median_total / static_cast<double>(median_count) < 0.3);
  }
}

TEST_CASE("k = 1 descriptor equals layer 1 of any deeper descriptor bitwise") {
  Rng rng(101);
  for (int trial = 0; trial < 20; ++trial) {
    const PointCloud cloud = testing::random_unit_cloud(rng);
    const MLHDescriptor base = compute_mlh_from_normalized(cloud, 8, 1, ViewDirection::pos_z());
    for (std::uint32_t k : {2u, 3u, 5u}) {
      const MLHDescriptor deep = compute_mlh_from_normalized(cloud, 8, k, ViewDirection::pos_z());
      for (std::uint32_t p = 0; p < 8; ++p) {
        for (std::uint32_t q = 0; q < 8; ++q) {
          CHECK(deep.at(p, q, 0) == base.at(p, q, 0));
        }
      }
    }
  }
}

TEST_CASE("descriptor invariants hold on random clouds") {
  Rng rng(555);
  for (int trial = 0; trial < 50; ++trial) {
    const PointCloud cloud = testing::random_unit_cloud(rng);
    for (std::uint32_t k : {1u, 2u, 5u}) {
      const MLHDescriptor desc = compute_mlh_from_normalized(cloud, 8, k, ViewDirection::pos_z());
      CHECK_NOTHROW(check_descriptor_invariants(desc));
    }
  }
}

TEST_CASE("export_layer_image maps heights to gray levels") {
  SUBCASE("all-empty descriptor renders white") {
    MLHDescriptor desc;
    desc.n = 4;
    desc.k = 2;
    desc.grid.assign(4 * 4 * 2, MLHDescriptor::kEmpty);
    const GrayImage image = export_layer_image(desc, 1);
    for (std::uint8_t px : image.pixels) CHECK(px == 255);
  }

  SUBCASE("endpoints and row order") {
    MLHDescriptor desc;
    desc.n = 2;
    desc.k = 1;
    desc.grid.assign(4, MLHDescriptor::kEmpty);
    desc.grid[(0 * 2 + 0) * 1] = 0.0f;  // bin (0, 0)
    desc.grid[(1 * 2 + 1) * 1] = 1.0f;  // bin (1, 1)
    const GrayImage image = export_layer_image(desc, 1);
    // Bin (0, 0) is the bottom-left: image row 1, column 0.
    CHECK(image.at(1, 0) == 0);
    // Bin (1, 1) is the top-right: image row 0, column 1.
    CHECK(image.at(0, 1) == 254);
    CHECK(image.at(0, 0) == 255);
    CHECK(image.at(1, 1) == 255);
  }

  SUBCASE("dense cube renders 254 everywhere on the top layer") {
    const PointCloud cloud = sample_surface(testing::cube_mesh(), 50'000, 3);
    const MLHDescriptor desc = compute_mlh(cloud, 8, 2, ViewDirection::pos_z());
    const GrayImage image = export_layer_image(desc, 2);
    for (std::uint8_t px : image.pixels) CHECK(px == 254);
  }

  SUBCASE("layer index is 1-based and validated") {
    MLHDescriptor desc;
    desc.n = 2;
    desc.k = 2;
    desc.grid.assign(8, MLHDescriptor::kEmpty);
    CHECK_THROWS_AS(export_layer_image(desc, 0), LayerOutOfRange);
    CHECK_THROWS_AS(export_layer_image(desc, 3), LayerOutOfRange);
  }
}
