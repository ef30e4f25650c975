#include "mlh/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "mlh/errors.hpp"
#include "mlh/parallel.hpp"
#include "mlh/rng.hpp"

namespace mlh {

std::size_t required_point_count(std::uint32_t grid_resolution, std::uint32_t layers,
                                 const SamplingConfig& config) {
  const double bins = static_cast<double>(grid_resolution) * static_cast<double>(grid_resolution);
  const double n = std::ceil(config.oversample_factor * static_cast<double>(layers) * bins);
  return std::max<std::size_t>(1024, static_cast<std::size_t>(n));
}

PointCloud sample_surface(const TriangleMesh& mesh, std::size_t n, std::uint64_t seed) {
  std::vector<double> cumulative(mesh.faces.size());
  double total = 0.0;
  for (std::size_t i = 0; i < mesh.faces.size(); ++i) {
    const auto& f = mesh.faces[i];
    total += triangle_area(mesh.vertices[f[0]], mesh.vertices[f[1]], mesh.vertices[f[2]]);
    cumulative[i] = total;
  }
  if (mesh.faces.empty() || total <= 0.0) {
    throw ZeroAreaMesh("mesh has no sampleable area");
  }

  // Points may drift past the box by an ulp when the barycentric weights do
  // not add to exactly 1; clamping keeps the containment invariant exact.
  const Aabb box = bounding_box(mesh);

  PointCloud cloud;
  cloud.points.resize(n);
  Vec3* out = cloud.points.data();
  parallel_for(n, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      Rng rng = Rng::at(seed, i);
      const double pick = rng.uniform01() * total;
      const std::size_t tri = static_cast<std::size_t>(
          std::upper_bound(cumulative.begin(), cumulative.end(), pick) - cumulative.begin());
      const auto& f = mesh.faces[std::min(tri, mesh.faces.size() - 1)];
      const Vec3& a = mesh.vertices[f[0]];
      const Vec3& b = mesh.vertices[f[1]];
      const Vec3& c = mesh.vertices[f[2]];
      const double s = std::sqrt(rng.uniform01());
      const double t = rng.uniform01();
      const Vec3 p = a * (1.0 - s) + b * (s * (1.0 - t)) + c * (s * t);
      out[i] = clamp(p, box);
    }
  });
  return cloud;
}

void write_xyz(const PointCloud& cloud, const std::filesystem::path& path) {
  std::ofstream outf(path, std::ios::binary);
  if (!outf) throw IoError(path.string() + ": cannot open for writing");
  char buf[96];
  for (const Vec3& p : cloud.points) {
    std::snprintf(buf, sizeof(buf), "%.9g %.9g %.9g\n", p.x, p.y, p.z);
    outf << buf;
  }
  if (!outf) throw IoError(path.string() + ": write failed");
}

}  // namespace mlh
