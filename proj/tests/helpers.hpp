#pragma once

#include <filesystem>
#include <initializer_list>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mqfb/graph.hpp"
#include "mqfb/partition.hpp"
#include "mqfb/sparse.hpp"

namespace mqfb::test {

inline Graph triangle() {
  const std::vector<Edge> e{{0, 1, 1.0}, {1, 2, 1.0}, {0, 2, 1.0}};
  return Graph::from_edges(3, e);
}

inline Graph single_edge(double w = 1.0) {
  const std::vector<Edge> e{{0, 1, w}};
  return Graph::from_edges(2, e);
}

inline Partition with_a(std::size_t n, std::initializer_list<std::size_t> a) {
  const std::vector<std::size_t> v(a);
  return Partition::from_set_a(n, v);
}

inline Eigen::VectorXd random_vector(std::mt19937_64& g, Eigen::Index n) {
  std::normal_distribution<double> d;
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = d(g);
  return v;
}

inline Eigen::MatrixXd random_matrix(std::mt19937_64& g, Eigen::Index r, Eigen::Index c) {
  std::normal_distribution<double> d;
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index j = 0; j < c; ++j) {
    for (Eigen::Index i = 0; i < r; ++i) m(i, j) = d(g);
  }
  return m;
}

// Q = block diagonal of a dense M, written out entrywise.
inline Eigen::MatrixXd dense_block_q(const Eigen::MatrixXd& m, const Partition& p) {
  Eigen::MatrixXd q = m;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (p.in_a(static_cast<std::size_t>(i)) != p.in_a(static_cast<std::size_t>(j))) q(i, j) = 0.0;
    }
  }
  return q;
}

// Generalized eigenpairs through the symmetric inverse square root of Q
// (eigendecomposition of Q, not a Cholesky factor). Columns Q-orthonormal.
struct OracleBasis {
  Eigen::VectorXd lambda;
  Eigen::MatrixXd u;
};

inline OracleBasis oracle_basis(const Eigen::MatrixXd& m, const Eigen::MatrixXd& q) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> qe(q);
  const Eigen::MatrixXd q_inv_half =
      qe.eigenvectors() * qe.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
      qe.eigenvectors().transpose();
  Eigen::MatrixXd c = q_inv_half * m * q_inv_half;
  c = 0.5 * (c + c.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ce(c);
  return {ce.eigenvalues(), q_inv_half * ce.eigenvectors()};
}

inline std::filesystem::path temp_dir(const std::string& name) {
  auto d = std::filesystem::temp_directory_path() / ("mqfb_test_" + name);
  std::filesystem::remove_all(d);
  std::filesystem::create_directories(d);
  return d;
}

}  // namespace mqfb::test
