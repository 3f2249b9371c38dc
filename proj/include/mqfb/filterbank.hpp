#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "mqfb/gft.hpp"
#include "mqfb/kernel.hpp"
#include "mqfb/partition.hpp"
#include "mqfb/sparse.hpp"
#include "mqfb/timing.hpp"

namespace mqfb {

enum class FilterMode { dense_spectral, polynomial };
enum class FilterFamily { lazy, orthogonal_cosine, custom };

std::string to_string(FilterMode mode);
std::string to_string(FilterFamily family);
FilterMode filter_mode_from_string(const std::string& s);
FilterFamily filter_family_from_string(const std::string& s);

// Analysis kernels h0, h1 and synthesis kernels g0, g1 of a two-channel bank.
struct FilterBankSpec {
  FilterKernel h0;
  FilterKernel h1;
  FilterKernel g0;
  FilterKernel g1;
  FilterMode mode = FilterMode::polynomial;
  FilterFamily family = FilterFamily::custom;
  double tolerance = 1e-8;

  bool all_polynomial() const;
  // Throws NotPolynomial if polynomial mode is requested with a closed form.
  void validate() const;
};

// h0 = 1, h1 = lambda, g0 = 2 - lambda, g1 = 1.
FilterBankSpec lazy_spec();
// h0 = sqrt2 cos(pi lambda / 4), h1 = sqrt2 sin(pi lambda / 4), g = h. Dense only.
FilterBankSpec orthogonal_cosine_spec();
FilterBankSpec custom_spec(std::vector<double> h0, std::vector<double> h1, std::vector<double> g0,
                           std::vector<double> g1, FilterMode mode = FilterMode::polynomial);
FilterBankSpec with_mode(FilterBankSpec spec, FilterMode mode);

// JSON spec files: {"family": "lazy" | "ortho-cosine" | "custom", "mode": "poly" | "dense",
// "tolerance": 1e-8, "h0": [...], "h1": [...], "g0": [...], "g1": [...]}.
// Coefficient lists are required for (and only read for) the custom family.
nlohmann::json spec_to_json(const FilterBankSpec& spec);
FilterBankSpec spec_from_json(const nlohmann::json& j);

struct ContextOptions {
  FilterMode mode = FilterMode::polynomial;
  SolverOptions solver;
  EigenOptions eigen;
};

// Operators a filter bank runs against for one partition: M, the inner
// product Q, and either the dense (M,Q)-GFT basis or a sparse fundamental
// operator for polynomial kernels.
class FilterBankContext {
 public:
  // Q is the block diagonal of M for the partition.
  FilterBankContext(SparseSym m, Partition p, const ContextOptions& options = {},
                    StageTimes* times = nullptr);
  // Explicit Q; used for the classical bipartite setting and to demonstrate
  // what breaks when Q is chosen wrongly.
  FilterBankContext(SparseSym m, SparseSym q, Partition p, const ContextOptions& options = {},
                    StageTimes* times = nullptr);

  FilterMode mode() const noexcept { return options_.mode; }
  const ContextOptions& options() const noexcept { return options_; }
  const Partition& partition() const noexcept { return partition_; }
  const SparseSym& m() const noexcept { return m_; }
  const SparseSym& q() const noexcept { return q_; }
  const SparseSym& q_a() const noexcept { return q_a_; }
  const SparseSym& q_b() const noexcept { return q_b_; }
  std::size_t size() const noexcept { return m_.size(); }

  bool has_basis() const noexcept { return basis_.has_value(); }
  const GftBasis& basis() const;
  const FundamentalOperator& fundamental() const;

  // h(Z) x, through the dense basis or by Horner's rule in Z.
  Eigen::MatrixXd apply(const FilterKernel& kernel, const Eigen::MatrixXd& x,
                        StageTimes* times = nullptr) const;

 private:
  void init(StageTimes* times);

  ContextOptions options_;
  SparseSym m_;
  SparseSym q_;
  Partition partition_;
  SparseSym q_a_;
  SparseSym q_b_;
  std::optional<GftBasis> basis_;
  std::unique_ptr<FundamentalOperator> fundamental_;
};

// Low-pass coefficients on A and high-pass coefficients on B, one column
// per signal channel, both in ascending vertex order.
struct ChannelCoefficients {
  Eigen::MatrixXd a;
  Eigen::MatrixXd d;

  std::size_t count() const noexcept { return static_cast<std::size_t>(a.rows() + d.rows()); }
};

ChannelCoefficients analyze(const FilterBankSpec& spec, const FilterBankContext& ctx,
                            const Eigen::MatrixXd& x, StageTimes* times = nullptr);
Eigen::MatrixXd synthesize(const FilterBankSpec& spec, const FilterBankContext& ctx,
                           const ChannelCoefficients& c, StageTimes* times = nullptr);

// Inner product of channel coefficients under Q permuted to (A, B) block
// order: a1^T Q_AA a2 + d1^T Q_BB d2, per column pair (columns summed).
double channel_inner(const FilterBankContext& ctx, const ChannelCoefficients& c1,
                     const ChannelCoefficients& c2);
double q_inner(const SparseSym& q, const Eigen::MatrixXd& x, const Eigen::MatrixXd& y);

struct PrReport {
  std::size_t eigenvalue_count = 0;
  bool evaluated_on_spectrum = false;  // false: evaluated on a [0,2] grid
  double max_pr_violation = 0.0;     // |h0 g0 + h1 g1 - 2|
  double max_alias_violation = 0.0;  // |h0(l) g0(2-l) - h1(l) g1(2-l)|
  double worst_lambda = 0.0;
  std::size_t trials = 0;
  double max_roundtrip_error = 0.0;  // relative 2-norm
  double tolerance = 0.0;
  bool spectral_passed = false;
  bool roundtrip_passed = false;
  bool passed = false;

  nlohmann::json to_json() const;
};

struct SpectralViolation {
  double pr = 0.0;
  double alias = 0.0;
  double worst_lambda = 0.0;
};

SpectralViolation pr_violation(const FilterBankSpec& spec, const Eigen::VectorXd& lambdas);
// max of |h0(l) - g1(2-l)| and |h1(l) - g0(2-l)| over the given points.
double biorthogonality_violation(const FilterBankSpec& spec, const Eigen::VectorXd& lambdas);
// max of |h0^2 + h1^2 - 2| and |h0(l) h0(2-l) - h1(l) h1(2-l)|.
double orthogonality_violation(const FilterBankSpec& spec, const Eigen::VectorXd& lambdas);
Eigen::VectorXd lambda_grid(std::size_t points = 10000);

PrReport check_pr(const FilterBankSpec& spec, const FilterBankContext& ctx, std::size_t trials,
                  std::uint64_t seed, std::optional<double> tol = std::nullopt);

struct OrthogonalityReport {
  std::size_t trials = 0;
  double max_inner_product_error = 0.0;  // relative to ||x||_Q ||y||_Q
  double max_adjoint_error = 0.0;        // relative to ||x||_Q ||c||_Q
  double min_norm_ratio = 0.0;           // ||T_a x||_Q / ||x||_Q
  double max_norm_ratio = 0.0;
  double tolerance = 0.0;
  bool passed = false;

  nlohmann::json to_json() const;
};

OrthogonalityReport check_q_orthogonality(const FilterBankSpec& spec, const FilterBankContext& ctx,
                                          std::size_t trials, std::uint64_t seed,
                                          std::optional<double> tol = std::nullopt);

struct FrameBounds {
  double alpha = 0.0;
  double beta = 0.0;
};

// alpha^2, beta^2 = half the inf / sup of h0^2 + h1^2 over a 10^4 point grid of [0, 2].
FrameBounds frame_bounds(const FilterBankSpec& spec, std::size_t grid_points = 10000);

// Filter bank conjugated by D^{1/2}: analysis sees D^{1/2} x, synthesis
// output is scaled by D^{-1/2}. With M the normalized Laplacian, constant
// inputs then give zero detail coefficients.
struct ZeroDcFilterBank {
  FilterBankSpec spec;
  Eigen::VectorXd sqrt_degree;
};

ZeroDcFilterBank zero_dc_wrap(FilterBankSpec spec, const Eigen::VectorXd& degrees);
ChannelCoefficients analyze(const ZeroDcFilterBank& bank, const FilterBankContext& ctx,
                            const Eigen::MatrixXd& x, StageTimes* times = nullptr);
Eigen::MatrixXd synthesize(const ZeroDcFilterBank& bank, const FilterBankContext& ctx,
                           const ChannelCoefficients& c, StageTimes* times = nullptr);

}  // namespace mqfb
