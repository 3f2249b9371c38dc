#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "mqfb/partition.hpp"
#include "mqfb/point_cloud.hpp"
#include "mqfb/rng.hpp"
#include "mqfb/sparse.hpp"

namespace mqfb {

struct Edge {
  std::size_t u;
  std::size_t v;
  double weight;
};

// Weighted undirected graph: symmetric adjacency, nonnegative weights, no
// self loops.
class Graph {
 public:
  Graph() = default;
  explicit Graph(SparseSym adjacency);
  static Graph from_edges(std::size_t n, std::span<const Edge> edges);

  std::size_t size() const noexcept { return adjacency_.size(); }
  std::size_t edge_count() const noexcept { return adjacency_.nonzeros() / 2; }
  const SparseSym& adjacency() const noexcept { return adjacency_; }
  Eigen::VectorXd degrees() const;
  std::vector<Edge> edges() const;  // u < v

  bool operator==(const Graph& other) const { return adjacency_ == other.adjacency_; }

 private:
  SparseSym adjacency_;
};

struct Components {
  std::vector<std::size_t> label;  // component id per vertex, ids in order of first vertex
  std::size_t count = 0;
  std::size_t isolated = 0;  // vertices without edges
};

Components connected_components(const Graph& g);

struct KnnOptions {
  // Exact search up to this many points, (1+eps)-approximate above.
  std::size_t exact_limit = 100000;
  bool force_exact = false;
  double approx_eps = 0.5;
  // Distances are floored at this fraction of the bounding-box diagonal.
  double distance_floor = 1e-9;
};

// Symmetric union of directed k-nearest-neighbour relations, weighted by
// inverse Euclidean distance. Connectivity is not guaranteed.
Graph knn_graph(const PointCloud& cloud, std::size_t k, const KnnOptions& options = {});
Graph knn_graph(const Eigen::MatrixX3d& positions, std::size_t k, const KnnOptions& options = {});

SparseSym combinatorial_laplacian(const Graph& g);

enum class IsolatedVertexPolicy {
  reject,        // throw ZeroDegree
  unit_diagonal  // isolated vertex gets a 1 on the diagonal and nothing else
};

SparseSym normalized_laplacian(const Graph& g,
                               IsolatedVertexPolicy policy = IsolatedVertexPolicy::reject);

// Fair coin per vertex; the whole draw repeats until both sides are nonempty.
Partition random_partition(std::size_t n, std::uint64_t seed);

// Redraws the membership of every component (of two or more vertices) that
// landed entirely on one side, so each such component meets both A and B.
Partition mix_components(const Partition& p, const Components& components, std::uint64_t seed);

// Keeps only edges that cross the partition.
Graph bipartize(const Graph& g, const Partition& p);

bool is_bipartite_on(const Graph& g, const Partition& p);

}  // namespace mqfb
