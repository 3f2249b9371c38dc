#include "mqfb/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/OrderingMethods>
#include <Eigen/SparseCholesky>

#include "mqfb/error.hpp"

namespace mqfb {

namespace {

using ColMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

void check_index(std::size_t n, std::size_t i, std::size_t j) {
  if (i >= n || j >= n) {
    throw Error(ErrorCode::invalid_argument,
                "entry (" + std::to_string(i) + "," + std::to_string(j) + ") outside " +
                    std::to_string(n) + "x" + std::to_string(n) + " matrix");
  }
}

// Exposes the column counts computed by the symbolic analysis so the
// factor size can be checked against the memory budget before factorizing.
class BudgetedLdlt : public Eigen::SimplicialLDLT<ColMatrix, Eigen::Lower, Eigen::AMDOrdering<int>> {
 public:
  std::size_t predicted_nonzeros() const {
    std::size_t total = 0;
    for (Eigen::Index k = 0; k < m_nonZerosPerCol.size(); ++k) {
      total += static_cast<std::size_t>(m_nonZerosPerCol[k]);
    }
    return total;
  }
};

using Cg = Eigen::ConjugateGradient<SparseSym::Storage, Eigen::Lower | Eigen::Upper,
                                    Eigen::DiagonalPreconditioner<double>>;

}  // namespace

SparseSym::SparseSym(std::size_t n) : storage_(static_cast<int>(n), static_cast<int>(n)) {}

SparseSym SparseSym::from_triplets(std::size_t n, std::span<const Triplet> entries) {
  std::vector<Eigen::Triplet<double, int>> trips;
  trips.reserve(entries.size());
  for (const auto& e : entries) {
    check_index(n, e.row, e.col);
    trips.emplace_back(static_cast<int>(e.row), static_cast<int>(e.col), e.value);
  }
  Storage s(static_cast<int>(n), static_cast<int>(n));
  s.setFromTriplets(trips.begin(), trips.end());
  s.prune(0.0);

  // Entries given on one triangle only are mirrored; entries given on both
  // must agree exactly.
  std::vector<Eigen::Triplet<double, int>> merged;
  merged.reserve(static_cast<std::size_t>(s.nonZeros()) * 2);
  for (int r = 0; r < s.outerSize(); ++r) {
    for (Storage::InnerIterator it(s, r); it; ++it) {
      const int c = static_cast<int>(it.col());
      merged.emplace_back(r, c, it.value());
      if (c == r) continue;
      const double other = s.coeff(c, r);
      if (other == 0.0) {
        merged.emplace_back(c, r, it.value());
      } else if (other != it.value()) {
        throw Error(ErrorCode::invalid_argument, "asymmetric entries at (" + std::to_string(r) +
                                                     "," + std::to_string(c) + ")");
      }
    }
  }
  Storage sym(static_cast<int>(n), static_cast<int>(n));
  sym.setFromTriplets(merged.begin(), merged.end());
  sym.makeCompressed();
  return SparseSym(std::move(sym));
}

SparseSym SparseSym::from_lower_triplets(std::size_t n, std::span<const Triplet> lower) {
  std::vector<Eigen::Triplet<double, int>> trips;
  trips.reserve(lower.size() * 2);
  for (const auto& e : lower) {
    check_index(n, e.row, e.col);
    trips.emplace_back(static_cast<int>(e.row), static_cast<int>(e.col), e.value);
    if (e.row != e.col) {
      trips.emplace_back(static_cast<int>(e.col), static_cast<int>(e.row), e.value);
    }
  }
  Storage s(static_cast<int>(n), static_cast<int>(n));
  s.setFromTriplets(trips.begin(), trips.end());
  s.prune(0.0);
  s.makeCompressed();
  return SparseSym(std::move(s));
}

SparseSym SparseSym::from_dense(const Eigen::MatrixXd& dense) {
  if (dense.rows() != dense.cols()) {
    throw Error(ErrorCode::dimension_mismatch, "dense matrix is not square");
  }
  if (dense != dense.transpose()) {
    throw Error(ErrorCode::invalid_argument, "dense matrix is not symmetric");
  }
  Storage s = dense.sparseView(0.0, 0.0);
  s.makeCompressed();
  return SparseSym(std::move(s));
}

SparseSym SparseSym::identity(std::size_t n) {
  std::vector<double> ones(n, 1.0);
  return diagonal(ones);
}

SparseSym SparseSym::diagonal(std::span<const double> diag) {
  const auto n = static_cast<int>(diag.size());
  Storage s(n, n);
  s.reserve(Eigen::VectorXi::Constant(n, 1));
  for (int i = 0; i < n; ++i) {
    if (diag[static_cast<std::size_t>(i)] != 0.0) {
      s.insert(i, i) = diag[static_cast<std::size_t>(i)];
    }
  }
  s.makeCompressed();
  return SparseSym(std::move(s));
}

double SparseSym::coeff(std::size_t i, std::size_t j) const {
  check_index(size(), i, j);
  return storage_.coeff(static_cast<int>(i), static_cast<int>(j));
}

Eigen::VectorXd SparseSym::diagonal_values() const { return storage_.diagonal(); }

double SparseSym::max_abs() const {
  double m = 0.0;
  for (int k = 0; k < storage_.nonZeros(); ++k) {
    m = std::max(m, std::abs(storage_.valuePtr()[k]));
  }
  return m;
}

bool SparseSym::is_diagonal() const {
  for (int r = 0; r < storage_.outerSize(); ++r) {
    for (Storage::InnerIterator it(storage_, r); it; ++it) {
      if (it.col() != r) return false;
    }
  }
  return true;
}

bool SparseSym::operator==(const SparseSym& other) const {
  if (size() != other.size() || nonzeros() != other.nonzeros()) return false;
  const Storage diff = storage_ - other.storage_;
  for (int k = 0; k < diff.nonZeros(); ++k) {
    if (diff.valuePtr()[k] != 0.0) return false;
  }
  return true;
}

SparseSym extract_principal_block(const SparseSym& m, std::span<const std::size_t> subset) {
  if (subset.empty()) throw Error(ErrorCode::empty_block, "principal block of an empty subset");
  const std::size_t n = m.size();
  std::vector<std::ptrdiff_t> position(n, -1);
  for (std::size_t k = 0; k < subset.size(); ++k) {
    if (subset[k] >= n) {
      throw Error(ErrorCode::invalid_argument, "subset index " + std::to_string(subset[k]) +
                                                   " out of range");
    }
    if (position[subset[k]] >= 0) {
      throw Error(ErrorCode::invalid_argument, "subset repeats a vertex");
    }
    position[subset[k]] = static_cast<std::ptrdiff_t>(k);
  }
  std::vector<Triplet> lower;
  for (std::size_t k = 0; k < subset.size(); ++k) {
    m.for_each_in_row(subset[k], [&](std::size_t col, double v) {
      const auto pos = position[col];
      if (pos >= 0 && static_cast<std::size_t>(pos) <= k) {
        lower.push_back({k, static_cast<std::size_t>(pos), v});
      }
    });
  }
  return SparseSym::from_lower_triplets(subset.size(), lower);
}

SparseSym build_block_diag_q(const SparseSym& m, const Partition& p) {
  if (p.size() != m.size()) {
    throw Error(ErrorCode::dimension_mismatch, "partition size differs from matrix size");
  }
  std::vector<Triplet> lower;
  lower.reserve(m.nonzeros());
  for (std::size_t r = 0; r < m.size(); ++r) {
    m.for_each_in_row(r, [&](std::size_t c, double v) {
      if (c <= r && p.in_a(r) == p.in_a(c)) lower.push_back({r, c, v});
    });
  }
  return SparseSym::from_lower_triplets(m.size(), lower);
}

Eigen::VectorXd spmv(const SparseSym& m, const Eigen::VectorXd& x) {
  if (static_cast<std::size_t>(x.size()) != m.size()) {
    throw Error(ErrorCode::dimension_mismatch, "spmv: vector length " + std::to_string(x.size()) +
                                                   " for matrix of size " +
                                                   std::to_string(m.size()));
  }
  return m.storage() * x;
}

Eigen::MatrixXd spmv(const SparseSym& m, const Eigen::MatrixXd& x) {
  if (static_cast<std::size_t>(x.rows()) != m.size()) {
    throw Error(ErrorCode::dimension_mismatch, "spmv: block rows " + std::to_string(x.rows()) +
                                                   " for matrix of size " +
                                                   std::to_string(m.size()));
  }
  return m.storage() * x;
}

// -----------------------------------------------------------------------------
// SpdSolver

struct SpdSolver::Impl {
  Eigen::VectorXd inverse_diagonal;
  BudgetedLdlt ldlt;
  Cg cg;
};

SpdSolver::SpdSolver(SparseSym matrix, SolverOptions options)
    : matrix_(std::move(matrix)), options_(options), impl_(std::make_unique<Impl>()) {
  const std::size_t n = matrix_.size();
  if (n == 0) throw Error(ErrorCode::invalid_argument, "empty matrix");
  const Eigen::VectorXd diag = matrix_.diagonal_values();
  if ((diag.array() <= 0.0).any()) {
    throw Error(ErrorCode::not_positive_definite, "nonpositive diagonal entry");
  }

  if (matrix_.is_diagonal()) {
    diagonal_ = true;
    effective_mode_ = options_.mode;
    impl_->inverse_diagonal = diag.cwiseInverse();
    factor_nonzeros_ = n;
    return;
  }

  effective_mode_ = options_.mode;
  if (effective_mode_ == SolverMode::direct) {
    ColMatrix lower = ColMatrix(matrix_.storage()).triangularView<Eigen::Lower>();
    impl_->ldlt.analyzePattern(lower);
    factor_nonzeros_ = impl_->ldlt.predicted_nonzeros() + n;
    // Values, row indices, and the permuted copy of the input.
    const std::size_t bytes = factor_nonzeros_ * (sizeof(double) + sizeof(int)) +
                              static_cast<std::size_t>(lower.nonZeros()) * 12;
    if (bytes > options_.memory_budget_bytes) {
      effective_mode_ = SolverMode::iterative;
    } else {
      impl_->ldlt.factorize(lower);
      if (impl_->ldlt.info() != Eigen::Success) {
        throw Error(ErrorCode::not_positive_definite, "LDL^T factorization failed");
      }
      // A PSD-but-singular matrix factors with a pivot at rounding level.
      const double floor = 64.0 * std::numeric_limits<double>::epsilon() * diag.maxCoeff();
      const double min_pivot = impl_->ldlt.vectorD().minCoeff();
      if (!(min_pivot > floor)) {
        throw Error(ErrorCode::not_positive_definite,
                    "pivot " + std::to_string(min_pivot) + " below " + std::to_string(floor));
      }
    }
  }
  if (effective_mode_ == SolverMode::iterative) {
    factor_nonzeros_ = 0;
    impl_->cg.setTolerance(options_.tolerance * 0.5);
    impl_->cg.setMaxIterations(options_.max_iterations);
    impl_->cg.compute(matrix_.storage());
  }
}

SpdSolver::~SpdSolver() = default;
SpdSolver::SpdSolver(SpdSolver&&) noexcept = default;
SpdSolver& SpdSolver::operator=(SpdSolver&&) noexcept = default;

Eigen::MatrixXd SpdSolver::solve(const Eigen::MatrixXd& y) const {
  if (static_cast<std::size_t>(y.rows()) != matrix_.size()) {
    throw Error(ErrorCode::dimension_mismatch, "right-hand side has " + std::to_string(y.rows()) +
                                                   " rows, matrix has " +
                                                   std::to_string(matrix_.size()));
  }
  if (diagonal_) return impl_->inverse_diagonal.asDiagonal() * y;

  const auto& a = matrix_.storage();
  Eigen::MatrixXd z(y.rows(), y.cols());
  if (effective_mode_ == SolverMode::direct) {
    z = impl_->ldlt.solve(y);
    // One step of iterative refinement when a column misses the bound.
    for (Eigen::Index c = 0; c < y.cols(); ++c) {
      const double ynorm = y.col(c).norm();
      Eigen::VectorXd r = y.col(c) - a * z.col(c);
      if (r.norm() > options_.tolerance * ynorm) {
        z.col(c) += impl_->ldlt.solve(r);
        r = y.col(c) - a * z.col(c);
        if (r.norm() > options_.tolerance * ynorm) {
          throw Error(ErrorCode::not_converged, "direct solve residual " +
                                                    std::to_string(r.norm() / ynorm) +
                                                    " above tolerance");
        }
      }
    }
    return z;
  }

  for (Eigen::Index c = 0; c < y.cols(); ++c) {
    const Eigen::VectorXd rhs = y.col(c);
    const double ynorm = rhs.norm();
    if (ynorm == 0.0) {
      z.col(c).setZero();
      continue;
    }
    z.col(c) = impl_->cg.solve(rhs);
    const double rel = (rhs - a * z.col(c)).norm() / ynorm;
    if (impl_->cg.info() != Eigen::Success || rel > options_.tolerance) {
      throw Error(ErrorCode::not_converged,
                  "conjugate gradient stopped at relative residual " + std::to_string(rel));
    }
  }
  return z;
}

Eigen::VectorXd SpdSolver::solve(const Eigen::VectorXd& y) const {
  return solve(Eigen::MatrixXd(y)).col(0);
}

Eigen::VectorXd spd_solve(const SpdSolver& solver, const Eigen::VectorXd& y) {
  return solver.solve(y);
}

}  // namespace mqfb
