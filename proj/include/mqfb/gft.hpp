#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "mqfb/kernel.hpp"
#include "mqfb/partition.hpp"
#include "mqfb/sparse.hpp"
#include "mqfb/timing.hpp"

namespace mqfb {

// Generalized eigenpairs M u = lambda Q u with U^T Q U = I and lambda
// nondecreasing. Keeps the operators it was built from.
struct GftBasis {
  Eigen::MatrixXd u;
  Eigen::VectorXd lambda;
  SparseSym m;
  SparseSym q;

  std::size_t size() const noexcept { return static_cast<std::size_t>(lambda.size()); }
};

struct EigenOptions {
  std::size_t dense_cap = 4096;
};

// Reduces to a standard symmetric problem through a Cholesky factor of Q.
// Eigenvector signs are fixed so the first nonzero component is positive.
GftBasis mq_eigendecompose(const SparseSym& m, const SparseSym& q, const EigenOptions& options = {});

// max |m_ij|, the scale used to normalize residuals.
double operator_scale(const SparseSym& m);

// max |U^T Q U - I|.
double q_orthonormality_error(const GftBasis& b);
// max_k ||M u_k - lambda_k Q u_k|| / (scale * ||u_k||).
double max_eigen_residual(const GftBasis& b);

struct FoldingReport {
  std::size_t n = 0;
  double tolerance = 0.0;
  double max_vector_residual = 0.0;    // ||M J u - (2-lambda) Q J u|| / (scale ||J u||)
  double max_subspace_residual = 0.0;  // Q-norm of J u outside the (2-lambda) eigenspace
  std::size_t worst_index = 0;
  bool inner_product_matches = true;
  bool passed = false;

  nlohmann::json to_json() const;
};

// Eigenvalues closer than this are treated as one eigenspace.
inline constexpr double kDegenerateGap = 1e-6;

// Checks that J maps each lambda-eigenvector into the (2-lambda)-eigenspace.
// With `require_block_q`, a basis whose Q is not the block diagonal of M for
// this partition raises WrongInnerProduct; without it the residuals are
// simply reported (useful to show folding failing under a wrong Q).
FoldingReport verify_spectral_folding(const GftBasis& b, const Partition& p, double tol,
                                      bool require_block_q = true);

struct SpectrumReport {
  double min_lambda = 0.0;
  double max_lambda = 0.0;
  bool in_range = false;  // [0 - 1e-10, 2 + 1e-10]
  std::size_t count_at_one = 0;
  std::size_t required_at_one = 0;  // ||A| - |B||
  double symmetry_distance = 0.0;  // max_k |lambda_k + lambda_{n-1-k} - 2|
  std::size_t lowest_multiplicity = 0;
  bool generalized_laplacian = false;  // off-diagonal entries of M are <= 0
  std::size_t component_count = 0;

  nlohmann::json to_json() const;
};

SpectrumReport spectrum_properties(const GftBasis& b, const Partition& p);

// Z = Q^{-1} M applied as one sparse product and one SPD solve.
class FundamentalOperator {
 public:
  FundamentalOperator(SparseSym m, SparseSym q, const SolverOptions& options = {});

  Eigen::MatrixXd apply(const Eigen::MatrixXd& x, StageTimes* times = nullptr) const;
  Eigen::VectorXd apply(const Eigen::VectorXd& x, StageTimes* times = nullptr) const;

  const SparseSym& m() const noexcept { return m_; }
  const SparseSym& q() const noexcept { return solver_.matrix(); }
  const SpdSolver& solver() const noexcept { return solver_; }
  std::size_t size() const noexcept { return m_.size(); }

 private:
  SparseSym m_;
  SpdSolver solver_;
};

// eigenvalues.csv (one per line) and eigenvectors.bin (n x n, row-major f64).
void save_basis(const std::filesystem::path& dir, const GftBasis& b);

Eigen::VectorXd apply_fundamental(const FundamentalOperator& z, const Eigen::VectorXd& x);

Eigen::MatrixXd gft_forward(const GftBasis& b, const Eigen::MatrixXd& x);
Eigen::MatrixXd gft_inverse(const GftBasis& b, const Eigen::MatrixXd& xhat);

// U h(Lambda) U^T Q x.
Eigen::MatrixXd dense_spectral_filter(const GftBasis& b, const FilterKernel& kernel,
                                      const Eigen::MatrixXd& x);

}  // namespace mqfb
