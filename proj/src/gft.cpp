#include "mqfb/gft.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Eigenvalues>

#include "mqfb/error.hpp"
#include "mqfb/io.hpp"

namespace mqfb {

namespace {

void require_square_pair(const SparseSym& m, const SparseSym& q) {
  if (m.size() != q.size()) {
    throw Error(ErrorCode::dimension_mismatch, "M is " + std::to_string(m.size()) + ", Q is " +
                                                   std::to_string(q.size()));
  }
}

void require_rows(const GftBasis& b, Eigen::Index rows) {
  if (static_cast<std::size_t>(rows) != b.size()) {
    throw Error(ErrorCode::dimension_mismatch, "signal has " + std::to_string(rows) +
                                                   " rows, basis has " + std::to_string(b.size()));
  }
}

// Components of the graph given by the off-diagonal pattern of m.
std::size_t pattern_components(const SparseSym& m) {
  constexpr auto unset = static_cast<std::size_t>(-1);
  std::vector<std::size_t> label(m.size(), unset);
  std::vector<std::size_t> stack;
  std::size_t count = 0;
  for (std::size_t s = 0; s < m.size(); ++s) {
    if (label[s] != unset) continue;
    label[s] = count;
    stack.assign(1, s);
    while (!stack.empty()) {
      const auto u = stack.back();
      stack.pop_back();
      m.for_each_in_row(u, [&](std::size_t v, double) {
        if (label[v] == unset) {
          label[v] = count;
          stack.push_back(v);
        }
      });
    }
    ++count;
  }
  return count;
}

}  // namespace

double operator_scale(const SparseSym& m) {
  const double s = m.max_abs();
  return s > 0.0 ? s : 1.0;
}

GftBasis mq_eigendecompose(const SparseSym& m, const SparseSym& q, const EigenOptions& options) {
  require_square_pair(m, q);
  const std::size_t n = m.size();
  if (n > options.dense_cap) {
    throw Error(ErrorCode::dense_cap_exceeded, "dense eigendecomposition of n=" +
                                                   std::to_string(n) + " exceeds cap " +
                                                   std::to_string(options.dense_cap));
  }

  const Eigen::MatrixXd qd = q.to_dense();
  Eigen::LLT<Eigen::MatrixXd> llt(qd);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::not_positive_definite, "Cholesky factorization of Q failed");
  }
  const Eigen::MatrixXd l = llt.matrixL();
  const double floor = 64.0 * std::numeric_limits<double>::epsilon() * qd.diagonal().maxCoeff();
  if (!((l.diagonal().array().square() > floor).all())) {
    throw Error(ErrorCode::not_positive_definite, "Q is singular to working precision");
  }

  // C = L^{-1} M L^{-T}
  const auto lower = l.triangularView<Eigen::Lower>();
  const Eigen::MatrixXd t = lower.solve(m.to_dense());
  Eigen::MatrixXd c = lower.solve(t.transpose());
  c = 0.5 * (c + c.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(c);
  if (eig.info() != Eigen::Success) {
    throw Error(ErrorCode::not_converged, "symmetric eigensolver did not converge");
  }

  GftBasis b;
  b.lambda = eig.eigenvalues();
  b.u = l.transpose().triangularView<Eigen::Upper>().solve(eig.eigenvectors());
  for (Eigen::Index k = 0; k < b.u.cols(); ++k) {
    auto col = b.u.col(k);
    const double cutoff = 1e-10 * col.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < col.size(); ++i) {
      if (std::abs(col(i)) > cutoff) {
        if (col(i) < 0.0) col = -col;
        break;
      }
    }
  }
  b.m = m;
  b.q = q;
  return b;
}

double q_orthonormality_error(const GftBasis& b) {
  const Eigen::MatrixXd qu = b.q.storage() * b.u;
  const Eigen::MatrixXd g = b.u.transpose() * qu;
  return (g - Eigen::MatrixXd::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff();
}

double max_eigen_residual(const GftBasis& b) {
  const double scale = operator_scale(b.m);
  const Eigen::MatrixXd mu = b.m.storage() * b.u;
  const Eigen::MatrixXd qu = b.q.storage() * b.u;
  double worst = 0.0;
  for (Eigen::Index k = 0; k < b.u.cols(); ++k) {
    const double r = (mu.col(k) - b.lambda(k) * qu.col(k)).norm() / (scale * b.u.col(k).norm());
    worst = std::max(worst, r);
  }
  return worst;
}

nlohmann::json FoldingReport::to_json() const {
  return {{"n", n},
          {"tolerance", tolerance},
          {"max_vector_residual", max_vector_residual},
          {"max_subspace_residual", max_subspace_residual},
          {"worst_index", worst_index},
          {"inner_product_matches", inner_product_matches},
          {"passed", passed}};
}

FoldingReport verify_spectral_folding(const GftBasis& b, const Partition& p, double tol,
                                      bool require_block_q) {
  if (p.size() != b.size()) {
    throw Error(ErrorCode::dimension_mismatch, "partition size differs from basis size");
  }
  FoldingReport report;
  report.n = b.size();
  report.tolerance = tol;
  report.inner_product_matches = build_block_diag_q(b.m, p) == b.q;
  if (require_block_q && !report.inner_product_matches) {
    throw Error(ErrorCode::wrong_inner_product,
                "basis Q is not the block diagonal of M for this partition");
  }

  const Eigen::Index n = static_cast<Eigen::Index>(b.size());
  const double scale = operator_scale(b.m);
  Eigen::VectorXd f(n);
  for (Eigen::Index i = 0; i < n; ++i) f(i) = p.sign(static_cast<std::size_t>(i));

  const Eigen::MatrixXd ju = f.asDiagonal() * b.u;
  const Eigen::MatrixXd mju = b.m.storage() * ju;
  const Eigen::MatrixXd qju = b.q.storage() * ju;
  // Coordinates of J u_k in the basis: U^T Q J U.
  const Eigen::MatrixXd coords = b.u.transpose() * qju;

  double worst = -1.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    const double folded = 2.0 - b.lambda(k);
    const double vec_res =
        (mju.col(k) - folded * qju.col(k)).norm() / (scale * ju.col(k).norm());

    // Project onto the computed eigenspace of the folded eigenvalue.
    const auto first = std::lower_bound(b.lambda.data(), b.lambda.data() + n, folded - kDegenerateGap);
    const auto last = std::upper_bound(b.lambda.data(), b.lambda.data() + n, folded + kDegenerateGap);
    double sub_res = std::numeric_limits<double>::infinity();
    if (first != last) {
      const auto j0 = static_cast<Eigen::Index>(first - b.lambda.data());
      const auto cnt = static_cast<Eigen::Index>(last - first);
      const Eigen::VectorXd outside =
          ju.col(k) - b.u.middleCols(j0, cnt) * coords.col(k).segment(j0, cnt);
      const double q_norm_sq = outside.dot(b.q.storage() * outside);
      const double ref_sq = ju.col(k).dot(qju.col(k));
      sub_res = std::sqrt(std::max(q_norm_sq, 0.0) / ref_sq);
    }
    report.max_vector_residual = std::max(report.max_vector_residual, vec_res);
    report.max_subspace_residual = std::max(report.max_subspace_residual, sub_res);
    const double k_worst = std::max(vec_res, sub_res);
    if (k_worst > worst) {
      worst = k_worst;
      report.worst_index = static_cast<std::size_t>(k);
    }
  }
  report.passed = report.max_vector_residual <= tol && report.max_subspace_residual <= tol;
  return report;
}

nlohmann::json SpectrumReport::to_json() const {
  return {{"min_lambda", min_lambda},
          {"max_lambda", max_lambda},
          {"in_range", in_range},
          {"count_at_one", count_at_one},
          {"required_at_one", required_at_one},
          {"symmetry_distance", symmetry_distance},
          {"lowest_multiplicity", lowest_multiplicity},
          {"generalized_laplacian", generalized_laplacian},
          {"component_count", component_count}};
}

SpectrumReport spectrum_properties(const GftBasis& b, const Partition& p) {
  if (p.size() != b.size()) {
    throw Error(ErrorCode::dimension_mismatch, "partition size differs from basis size");
  }
  SpectrumReport r;
  const auto& lam = b.lambda;
  const Eigen::Index n = lam.size();
  r.min_lambda = lam.minCoeff();
  r.max_lambda = lam.maxCoeff();
  r.in_range = r.min_lambda >= -1e-10 && r.max_lambda <= 2.0 + 1e-10;
  for (Eigen::Index k = 0; k < n; ++k) {
    if (std::abs(lam(k) - 1.0) <= kDegenerateGap) ++r.count_at_one;
    if (lam(k) - lam(0) <= kDegenerateGap) ++r.lowest_multiplicity;
    r.symmetry_distance = std::max(r.symmetry_distance, std::abs(lam(k) + lam(n - 1 - k) - 2.0));
  }
  const auto na = p.set_a().size();
  const auto nb = p.set_b().size();
  r.required_at_one = na > nb ? na - nb : nb - na;

  r.generalized_laplacian = true;
  for (std::size_t i = 0; i < b.m.size(); ++i) {
    b.m.for_each_in_row(i, [&](std::size_t j, double v) {
      if (j != i && v > 0.0) r.generalized_laplacian = false;
    });
  }
  r.component_count = pattern_components(b.m);
  return r;
}

FundamentalOperator::FundamentalOperator(SparseSym m, SparseSym q, const SolverOptions& options)
    : m_(std::move(m)), solver_(std::move(q), options) {
  require_square_pair(m_, solver_.matrix());
}

Eigen::MatrixXd FundamentalOperator::apply(const Eigen::MatrixXd& x, StageTimes* times) const {
  Eigen::MatrixXd y;
  {
    ScopedTimer timer(times ? &times->filtering : nullptr);
    y = spmv(m_, x);
  }
  ScopedTimer timer(times ? &times->solve : nullptr);
  return solver_.solve(y);
}

Eigen::VectorXd FundamentalOperator::apply(const Eigen::VectorXd& x, StageTimes* times) const {
  return apply(Eigen::MatrixXd(x), times).col(0);
}

void save_basis(const std::filesystem::path& dir, const GftBasis& b) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::io, "cannot create " + dir.string() + ": " + ec.message());
  io::write_csv(dir / "eigenvalues.csv", b.lambda);
  io::write_binary(dir / "eigenvectors.bin", b.u);
}

Eigen::VectorXd apply_fundamental(const FundamentalOperator& z, const Eigen::VectorXd& x) {
  return z.apply(x);
}

Eigen::MatrixXd gft_forward(const GftBasis& b, const Eigen::MatrixXd& x) {
  require_rows(b, x.rows());
  return b.u.transpose() * (b.q.storage() * x);
}

Eigen::MatrixXd gft_inverse(const GftBasis& b, const Eigen::MatrixXd& xhat) {
  require_rows(b, xhat.rows());
  return b.u * xhat;
}

Eigen::MatrixXd dense_spectral_filter(const GftBasis& b, const FilterKernel& kernel,
                                      const Eigen::MatrixXd& x) {
  require_rows(b, x.rows());
  Eigen::VectorXd response(b.lambda.size());
  for (Eigen::Index k = 0; k < response.size(); ++k) response(k) = kernel(b.lambda(k));
  return b.u * (response.asDiagonal() * gft_forward(b, x));
}

}  // namespace mqfb
