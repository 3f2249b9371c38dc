#include "mqfb/kdtree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>

#include "mqfb/error.hpp"

namespace mqfb {

KdTree::KdTree(const Eigen::MatrixX3d& points, std::size_t leaf_size)
    : points_(points), leaf_size_(std::max<std::size_t>(leaf_size, 1)) {
  if (static_cast<std::size_t>(points.rows()) >= std::numeric_limits<std::uint32_t>::max()) {
    throw Error(ErrorCode::invalid_argument, "too many points for the kd-tree index type");
  }
  order_.resize(static_cast<std::size_t>(points.rows()));
  std::iota(order_.begin(), order_.end(), 0u);
  nodes_.reserve(2 * order_.size() / leaf_size_ + 1);
  if (!order_.empty()) build(0, static_cast<std::uint32_t>(order_.size()));
}

std::int32_t KdTree::build(std::uint32_t begin, std::uint32_t end) {
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back(Node{0.0, begin, end, -1, -1, -1});
  if (end - begin <= leaf_size_) return id;

  Eigen::RowVector3d lo = Eigen::RowVector3d::Constant(std::numeric_limits<double>::infinity());
  Eigen::RowVector3d hi = -lo;
  for (auto k = begin; k < end; ++k) {
    const auto p = points_.row(order_[k]);
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  Eigen::Index axis = 0;
  (hi - lo).maxCoeff(&axis);
  if (hi(axis) == lo(axis)) return id;  // all points coincide

  const auto mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     return points_(a, axis) < points_(b, axis);
                   });
  nodes_[static_cast<std::size_t>(id)].axis = static_cast<std::int8_t>(axis);
  nodes_[static_cast<std::size_t>(id)].split = points_(order_[mid], axis);
  const auto left = build(begin, mid);
  const auto right = build(mid, end);
  nodes_[static_cast<std::size_t>(id)].left = left;
  nodes_[static_cast<std::size_t>(id)].right = right;
  return id;
}

void KdTree::nearest(std::size_t query, std::size_t k, double eps, std::vector<std::size_t>& index,
                     std::vector<double>& distance) const {
  index.clear();
  distance.clear();
  if (k == 0 || nodes_.empty()) return;

  const Eigen::RowVector3d q = points_.row(static_cast<Eigen::Index>(query));
  // Candidates sorted ascending by (squared distance, index).
  std::vector<std::pair<double, std::uint32_t>> best;
  best.reserve(k + 1);
  const double shrink = 1.0 / ((1.0 + eps) * (1.0 + eps));
  auto worst = [&] {
    return best.size() < k ? std::numeric_limits<double>::infinity() : best.back().first;
  };

  // Explicit stack of (node, squared distance lower bound along the split).
  std::vector<std::pair<std::int32_t, double>> stack;
  stack.emplace_back(0, 0.0);
  while (!stack.empty()) {
    const auto [id, bound] = stack.back();
    stack.pop_back();
    if (bound > worst() * shrink) continue;
    const Node& node = nodes_[static_cast<std::size_t>(id)];
    if (node.axis < 0) {
      for (auto pos = node.begin; pos < node.end; ++pos) {
        const auto j = order_[pos];
        if (j == query) continue;
        const double d2 = (points_.row(j) - q).squaredNorm();
        const std::pair<double, std::uint32_t> cand{d2, j};
        if (best.size() == k && !(cand < best.back())) continue;
        best.insert(std::upper_bound(best.begin(), best.end(), cand), cand);
        if (best.size() > k) best.pop_back();
      }
      continue;
    }
    const double diff = q(node.axis) - node.split;
    const std::int32_t near = diff < 0.0 ? node.left : node.right;
    const std::int32_t far = diff < 0.0 ? node.right : node.left;
    // Far side first onto the stack so the near side is explored first.
    stack.emplace_back(far, std::max(bound, diff * diff));
    stack.emplace_back(near, bound);
  }

  index.reserve(best.size());
  distance.reserve(best.size());
  for (const auto& [d2, j] : best) {
    index.push_back(j);
    distance.push_back(std::sqrt(d2));
  }
}

}  // namespace mqfb
