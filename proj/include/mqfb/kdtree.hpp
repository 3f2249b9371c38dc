#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace mqfb {

// Static 3D kd-tree over a borrowed point matrix (the matrix must outlive
// the tree). Queries are const and thread safe.
class KdTree {
 public:
  explicit KdTree(const Eigen::MatrixX3d& points, std::size_t leaf_size = 12);

  // The k nearest points to point `query` (itself excluded), ordered by
  // (distance, index). With eps > 0 the search is (1+eps)-approximate:
  // every returned distance is within (1+eps) of the true k-th distance.
  void nearest(std::size_t query, std::size_t k, double eps, std::vector<std::size_t>& index,
               std::vector<double>& distance) const;

  std::size_t size() const noexcept { return order_.size(); }

 private:
  struct Node {
    double split = 0.0;
    std::uint32_t begin = 0;
    std::uint32_t end = 0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    std::int8_t axis = -1;  // -1 marks a leaf
  };

  std::int32_t build(std::uint32_t begin, std::uint32_t end);

  const Eigen::MatrixX3d& points_;
  std::size_t leaf_size_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
};

}  // namespace mqfb
