#include "mqfb/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "mqfb/error.hpp"
#include "mqfb/rng.hpp"

namespace mqfb {

namespace {

double random_weight(std::mt19937_64& engine) {
  return std::uniform_real_distribution<double>(0.5, 1.5)(engine);
}

// Grows the component of vertex 0 one random edge at a time until it spans
// the graph. `allowed(u, v)` filters candidate endpoints.
template <typename Allowed>
void join_components(std::size_t n, std::vector<Edge>& edges, std::mt19937_64& engine,
                     Allowed allowed) {
  const auto comps = connected_components(Graph::from_edges(n, edges));
  if (comps.count < 2) return;
  std::vector<bool> joined(comps.count, false);
  joined[comps.label[0]] = true;
  for (std::size_t step = 1; step < comps.count; ++step) {
    std::vector<Edge> candidates;
    for (std::size_t u = 0; u < n; ++u) {
      if (!joined[comps.label[u]]) continue;
      for (std::size_t v = 0; v < n; ++v) {
        if (!joined[comps.label[v]] && allowed(u, v)) {
          candidates.push_back({std::min(u, v), std::max(u, v), 0.0});
        }
      }
    }
    if (candidates.empty()) throw Error(ErrorCode::invalid_argument, "cannot join components");
    auto e = candidates[std::uniform_int_distribution<std::size_t>(0, candidates.size() - 1)(engine)];
    e.weight = random_weight(engine);
    edges.push_back(e);
    joined[comps.label[e.u]] = true;
    joined[comps.label[e.v]] = true;
  }
}

}  // namespace

PointCloud synthetic_cloud(std::size_t n, std::uint64_t seed, std::size_t blobs) {
  if (n < 2 || blobs == 0) throw Error(ErrorCode::invalid_argument, "need n >= 2 and a blob");
  const SeedStream stream(seed);
  auto layout = stream.split(0).engine();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> spread(0.03, 0.12);

  std::vector<Eigen::Vector3d> centre(blobs), sigma(blobs);
  for (std::size_t b = 0; b < blobs; ++b) {
    centre[b] = {0.2 + 0.6 * unit(layout), 0.2 + 0.6 * unit(layout), 0.2 + 0.6 * unit(layout)};
    sigma[b] = {spread(layout), spread(layout), spread(layout)};
  }

  auto draw = stream.split(1).engine();
  std::normal_distribution<double> normal;
  std::uniform_int_distribution<std::size_t> pick(0, blobs - 1);
  PointCloud cloud;
  cloud.positions.resize(static_cast<Eigen::Index>(n), 3);
  cloud.attributes.resize(static_cast<Eigen::Index>(n), 3);
  constexpr double two_pi = 2.0 * std::numbers::pi;
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(n); ++i) {
    const auto b = pick(draw);
    for (int a = 0; a < 3; ++a) {
      // float32 storage, so round here and keep the in-memory cloud exact.
      cloud.positions(i, a) = static_cast<float>(centre[b](a) + sigma[b](a) * normal(draw));
    }
    const double x = cloud.positions(i, 0), y = cloud.positions(i, 1), z = cloud.positions(i, 2);
    cloud.attributes(i, 0) = std::round(127.5 + 110.0 * std::sin(two_pi * (0.8 * x + 0.3 * z)));
    cloud.attributes(i, 1) = std::round(127.5 + 110.0 * std::cos(two_pi * (0.6 * y - 0.4 * x)));
    cloud.attributes(i, 2) = std::round(127.5 + 110.0 * std::sin(two_pi * (0.5 * z + 0.5 * y) + 1.0));
  }
  cloud.attribute_names = {"red", "green", "blue"};
  cloud.position_type = PlyType::float32;
  cloud.attribute_types.assign(3, PlyType::uint8);
  return cloud;
}

Graph erdos_renyi_connected(std::size_t n, double p, std::uint64_t seed) {
  if (n < 2 || !(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::invalid_argument, "bad G(n,p)");
  auto engine = SeedStream(seed).engine();
  std::bernoulli_distribution keep(p);
  std::vector<Edge> edges;
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = u + 1; v < n; ++v) {
      if (keep(engine)) edges.push_back({u, v, random_weight(engine)});
    }
  }
  join_components(n, edges, engine, [](std::size_t, std::size_t) { return true; });
  return Graph::from_edges(n, edges);
}

Graph random_knn_graph(std::size_t n, std::size_t k, std::uint64_t seed) {
  const SeedStream stream(seed);
  auto engine = stream.split(0).engine();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Eigen::MatrixX3d pos(static_cast<Eigen::Index>(n), 3);
  for (Eigen::Index i = 0; i < pos.rows(); ++i) {
    for (int a = 0; a < 3; ++a) pos(i, a) = unit(engine);
  }
  auto edges = knn_graph(pos, k).edges();
  auto join = stream.split(1).engine();
  join_components(n, edges, join, [](std::size_t, std::size_t) { return true; });
  return Graph::from_edges(n, edges);
}

BipartiteGraph random_bipartite(std::size_t n, double p, std::uint64_t seed) {
  const SeedStream stream(seed);
  const Partition part = random_partition(n, stream.split(0).seed());
  auto engine = stream.split(1).engine();
  std::bernoulli_distribution keep(p);
  std::vector<Edge> edges;
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = u + 1; v < n; ++v) {
      if (part.in_a(u) != part.in_a(v) && keep(engine)) edges.push_back({u, v, random_weight(engine)});
    }
  }
  join_components(n, edges, engine,
                  [&](std::size_t u, std::size_t v) { return part.in_a(u) != part.in_a(v); });
  return {Graph::from_edges(n, edges), part};
}

}  // namespace mqfb
