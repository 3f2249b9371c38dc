#pragma once

#include <cstddef>
#include <cstdint>

#include "mqfb/graph.hpp"
#include "mqfb/partition.hpp"
#include "mqfb/point_cloud.hpp"

namespace mqfb {

// Points drawn from `blobs` anisotropic Gaussian clusters in the unit cube,
// with an RGB field in [0, 255] that varies smoothly with position. Stored
// as float32 positions and uint8 colours, like a captured frame.
PointCloud synthetic_cloud(std::size_t n, std::uint64_t seed, std::size_t blobs = 8);

// G(n, p) with weights uniform in [0.5, 1.5]. Components are then joined by
// one random edge each so the result is connected.
Graph erdos_renyi_connected(std::size_t n, double p, std::uint64_t seed);

// KNN graph on n uniform points in the unit cube, joined into one component
// the same way.
Graph random_knn_graph(std::size_t n, std::size_t k, std::uint64_t seed);

struct BipartiteGraph {
  Graph graph;
  Partition partition;
};

// Random bipartite graph: random sides, each cross pair kept with
// probability p, then joined into one component with cross edges.
BipartiteGraph random_bipartite(std::size_t n, double p, std::uint64_t seed);

}  // namespace mqfb
