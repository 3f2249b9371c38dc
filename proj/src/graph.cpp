#include "mqfb/graph.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mqfb/error.hpp"
#include "mqfb/kdtree.hpp"

namespace mqfb {

Graph::Graph(SparseSym adjacency) : adjacency_(std::move(adjacency)) {
  for (std::size_t r = 0; r < adjacency_.size(); ++r) {
    adjacency_.for_each_in_row(r, [&](std::size_t c, double w) {
      if (c == r) throw Error(ErrorCode::invalid_argument, "graph has a self loop");
      if (!(w >= 0.0) || !std::isfinite(w)) {
        throw Error(ErrorCode::invalid_argument, "graph weight must be finite and nonnegative");
      }
    });
  }
}

Graph Graph::from_edges(std::size_t n, std::span<const Edge> edges) {
  std::vector<Triplet> lower;
  lower.reserve(edges.size());
  for (const auto& e : edges) {
    if (e.u == e.v) throw Error(ErrorCode::invalid_argument, "graph has a self loop");
    lower.push_back({std::max(e.u, e.v), std::min(e.u, e.v), e.weight});
  }
  return Graph(SparseSym::from_lower_triplets(n, lower));
}

Eigen::VectorXd Graph::degrees() const {
  Eigen::VectorXd d = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(size()));
  for (std::size_t r = 0; r < size(); ++r) {
    adjacency_.for_each_in_row(r, [&](std::size_t, double w) { d(static_cast<Eigen::Index>(r)) += w; });
  }
  return d;
}

std::vector<Edge> Graph::edges() const {
  std::vector<Edge> out;
  out.reserve(edge_count());
  for (std::size_t r = 0; r < size(); ++r) {
    adjacency_.for_each_in_row(r, [&](std::size_t c, double w) {
      if (r < c) out.push_back({r, c, w});
    });
  }
  return out;
}

Components connected_components(const Graph& g) {
  constexpr auto unset = static_cast<std::size_t>(-1);
  Components out;
  out.label.assign(g.size(), unset);
  std::vector<std::size_t> queue;
  for (std::size_t s = 0; s < g.size(); ++s) {
    if (out.label[s] != unset) continue;
    const std::size_t id = out.count++;
    out.label[s] = id;
    queue.assign(1, s);
    bool has_edge = false;
    while (!queue.empty()) {
      const auto u = queue.back();
      queue.pop_back();
      g.adjacency().for_each_in_row(u, [&](std::size_t v, double) {
        has_edge = true;
        if (out.label[v] == unset) {
          out.label[v] = id;
          queue.push_back(v);
        }
      });
    }
    if (!has_edge) ++out.isolated;
  }
  return out;
}

Graph knn_graph(const PointCloud& cloud, std::size_t k, const KnnOptions& options) {
  cloud.validate();
  return knn_graph(cloud.positions, k, options);
}

Graph knn_graph(const Eigen::MatrixX3d& positions, std::size_t k, const KnnOptions& options) {
  const auto n = static_cast<std::size_t>(positions.rows());
  if (k < 1) throw Error(ErrorCode::invalid_argument, "k must be at least 1");
  if (n <= k) {
    throw Error(ErrorCode::invalid_argument,
                "knn graph needs more than k=" + std::to_string(k) + " points, got " +
                    std::to_string(n));
  }
  if (!positions.allFinite()) {
    throw Error(ErrorCode::invalid_argument, "point cloud has NaN or Inf coordinates");
  }

  const double diagonal = (positions.colwise().maxCoeff() - positions.colwise().minCoeff()).norm();
  const double floor = options.distance_floor * (diagonal > 0.0 ? diagonal : 1.0);
  const bool exact = options.force_exact || n <= options.exact_limit;
  const double eps = exact ? 0.0 : options.approx_eps;

  const KdTree tree(positions);
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  pairs.reserve(n * k);
  std::vector<std::size_t> idx;
  std::vector<double> dist;
  for (std::size_t i = 0; i < n; ++i) {
    tree.nearest(i, k, eps, idx, dist);
    for (auto j : idx) pairs.emplace_back(std::max(i, j), std::min(i, j));
  }
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());

  std::vector<Triplet> lower;
  lower.reserve(pairs.size());
  for (const auto& [i, j] : pairs) {
    const double d = (positions.row(static_cast<Eigen::Index>(i)) -
                      positions.row(static_cast<Eigen::Index>(j)))
                         .norm();
    lower.push_back({i, j, 1.0 / std::max(d, floor)});
  }
  return Graph(SparseSym::from_lower_triplets(n, lower));
}

SparseSym combinatorial_laplacian(const Graph& g) {
  const auto d = g.degrees();
  std::vector<Triplet> lower;
  lower.reserve(g.edge_count() + g.size());
  for (std::size_t r = 0; r < g.size(); ++r) {
    g.adjacency().for_each_in_row(r, [&](std::size_t c, double w) {
      if (c < r) lower.push_back({r, c, -w});
    });
    lower.push_back({r, r, d(static_cast<Eigen::Index>(r))});
  }
  return SparseSym::from_lower_triplets(g.size(), lower);
}

SparseSym normalized_laplacian(const Graph& g, IsolatedVertexPolicy policy) {
  const auto d = g.degrees();
  Eigen::VectorXd inv_sqrt(d.size());
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    if (d(i) > 0.0) {
      inv_sqrt(i) = 1.0 / std::sqrt(d(i));
    } else if (policy == IsolatedVertexPolicy::reject) {
      throw Error(ErrorCode::zero_degree, "vertex " + std::to_string(i) + " has zero degree");
    } else {
      inv_sqrt(i) = 0.0;
    }
  }
  std::vector<Triplet> lower;
  lower.reserve(g.edge_count() + g.size());
  for (std::size_t r = 0; r < g.size(); ++r) {
    const auto ri = static_cast<Eigen::Index>(r);
    g.adjacency().for_each_in_row(r, [&](std::size_t c, double w) {
      if (c < r) lower.push_back({r, c, -w * inv_sqrt(ri) * inv_sqrt(static_cast<Eigen::Index>(c))});
    });
    lower.push_back({r, r, 1.0});
  }
  return SparseSym::from_lower_triplets(g.size(), lower);
}

Partition random_partition(std::size_t n, std::uint64_t seed) {
  if (n < 2) throw Error(ErrorCode::invalid_argument, "partition needs n >= 2");
  auto engine = SeedStream(seed).engine();
  std::vector<std::int8_t> f(n);
  while (true) {
    std::size_t in_a = 0;
    for (auto& v : f) {
      v = (engine() >> 63) ? std::int8_t{1} : std::int8_t{-1};
      in_a += v > 0 ? 1 : 0;
    }
    if (in_a > 0 && in_a < n) return Partition(std::move(f));
  }
}

Partition mix_components(const Partition& p, const Components& components, std::uint64_t seed) {
  std::vector<std::size_t> size(components.count, 0), in_a(components.count, 0);
  for (std::size_t i = 0; i < p.size(); ++i) {
    ++size[components.label[i]];
    in_a[components.label[i]] += p.in_a(i) ? 1 : 0;
  }
  std::vector<std::int8_t> f = p.indicator();
  const SeedStream stream(seed);
  std::vector<std::size_t> members;
  for (std::size_t c = 0; c < components.count; ++c) {
    if (size[c] < 2 || (in_a[c] > 0 && in_a[c] < size[c])) continue;
    members.clear();
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (components.label[i] == c) members.push_back(i);
    }
    auto engine = stream.split(c).engine();
    while (true) {
      std::size_t count = 0;
      for (auto i : members) {
        f[i] = (engine() >> 63) ? std::int8_t{1} : std::int8_t{-1};
        count += f[i] > 0 ? 1 : 0;
      }
      if (count > 0 && count < members.size()) break;
    }
  }
  return Partition(std::move(f));
}

Graph bipartize(const Graph& g, const Partition& p) {
  if (p.size() != g.size()) {
    throw Error(ErrorCode::dimension_mismatch, "partition size differs from graph size");
  }
  std::vector<Triplet> lower;
  for (std::size_t r = 0; r < g.size(); ++r) {
    g.adjacency().for_each_in_row(r, [&](std::size_t c, double w) {
      if (c < r && p.in_a(r) != p.in_a(c)) lower.push_back({r, c, w});
    });
  }
  return Graph(SparseSym::from_lower_triplets(g.size(), lower));
}

bool is_bipartite_on(const Graph& g, const Partition& p) {
  for (std::size_t r = 0; r < g.size(); ++r) {
    bool ok = true;
    g.adjacency().for_each_in_row(r, [&](std::size_t c, double) {
      if (p.in_a(r) == p.in_a(c)) ok = false;
    });
    if (!ok) return false;
  }
  return true;
}

}  // namespace mqfb
