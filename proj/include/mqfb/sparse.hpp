#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "mqfb/partition.hpp"

namespace mqfb {

struct Triplet {
  std::size_t row;
  std::size_t col;
  double value;
};

// Symmetric sparse matrix in compressed row storage. Both triangles are
// stored so row access and products need no mirroring. Explicit zeros are
// never stored.
class SparseSym {
 public:
  using Storage = Eigen::SparseMatrix<double, Eigen::RowMajor, int>;

  SparseSym() = default;
  explicit SparseSym(std::size_t n);

  // Entries may be given for one or both triangles. Duplicates are summed.
  // A pair (i,j) and (j,i) given with different values is rejected.
  static SparseSym from_triplets(std::size_t n, std::span<const Triplet> entries);
  // Mirrors every off-diagonal entry, so each unordered pair must appear once.
  static SparseSym from_lower_triplets(std::size_t n, std::span<const Triplet> lower);
  static SparseSym from_dense(const Eigen::MatrixXd& dense);
  static SparseSym identity(std::size_t n);
  static SparseSym diagonal(std::span<const double> diag);

  std::size_t size() const noexcept { return static_cast<std::size_t>(storage_.rows()); }
  std::size_t nonzeros() const noexcept { return static_cast<std::size_t>(storage_.nonZeros()); }

  double coeff(std::size_t i, std::size_t j) const;
  Eigen::VectorXd diagonal_values() const;
  double max_abs() const;
  bool is_diagonal() const;

  const Storage& storage() const noexcept { return storage_; }
  Eigen::MatrixXd to_dense() const { return Eigen::MatrixXd(storage_); }

  template <typename Fn>
  void for_each_in_row(std::size_t row, Fn&& fn) const {
    for (Storage::InnerIterator it(storage_, static_cast<int>(row)); it; ++it) {
      fn(static_cast<std::size_t>(it.col()), it.value());
    }
  }

  bool operator==(const SparseSym& other) const;

 private:
  explicit SparseSym(Storage storage) : storage_(std::move(storage)) {}
  Storage storage_;
};

SparseSym extract_principal_block(const SparseSym& m, std::span<const std::size_t> subset);

// Inner-product matrix of the folding construction: keeps within-A and
// within-B entries of m and drops every A-B coupling.
SparseSym build_block_diag_q(const SparseSym& m, const Partition& p);

Eigen::VectorXd spmv(const SparseSym& m, const Eigen::VectorXd& x);
Eigen::MatrixXd spmv(const SparseSym& m, const Eigen::MatrixXd& x);

enum class SolverMode { direct, iterative };

struct SolverOptions {
  SolverMode mode = SolverMode::direct;
  // Relative residual bound ||A z - y|| <= tolerance * ||y||.
  double tolerance = 1e-10;
  // Direct factorizations whose factor would exceed this switch to CG.
  std::size_t memory_budget_bytes = std::size_t{2} << 30;
  int max_iterations = 10000;
};

// SPD solver. The matrix is factorized (or prepared for CG) once at
// construction; solve() is const and may be called concurrently.
class SpdSolver {
 public:
  SpdSolver(SparseSym matrix, SolverOptions options = {});
  ~SpdSolver();
  SpdSolver(SpdSolver&&) noexcept;
  SpdSolver& operator=(SpdSolver&&) noexcept;

  Eigen::VectorXd solve(const Eigen::VectorXd& y) const;
  Eigen::MatrixXd solve(const Eigen::MatrixXd& y) const;

  const SparseSym& matrix() const noexcept { return matrix_; }
  const SolverOptions& options() const noexcept { return options_; }
  // Mode actually in use (a direct request may fall back to iterative).
  SolverMode effective_mode() const noexcept { return effective_mode_; }
  bool is_diagonal() const noexcept { return diagonal_; }
  std::size_t factor_nonzeros() const noexcept { return factor_nonzeros_; }

 private:
  struct Impl;
  SparseSym matrix_;
  SolverOptions options_;
  SolverMode effective_mode_ = SolverMode::direct;
  bool diagonal_ = false;
  std::size_t factor_nonzeros_ = 0;
  std::unique_ptr<Impl> impl_;
};

Eigen::VectorXd spd_solve(const SpdSolver& solver, const Eigen::VectorXd& y);

}  // namespace mqfb
