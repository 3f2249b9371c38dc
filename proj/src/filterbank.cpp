#include "mqfb/filterbank.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>

#include "mqfb/error.hpp"
#include "mqfb/rng.hpp"

namespace mqfb {

namespace {

Eigen::MatrixXd upsample(const Partition& p, const Eigen::MatrixXd& a, const Eigen::MatrixXd& d) {
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p.size()), a.cols());
  const auto& set_a = p.set_a();
  const auto& set_b = p.set_b();
  for (std::size_t k = 0; k < set_a.size(); ++k) {
    x.row(static_cast<Eigen::Index>(set_a[k])) = a.row(static_cast<Eigen::Index>(k));
  }
  for (std::size_t k = 0; k < set_b.size(); ++k) {
    x.row(static_cast<Eigen::Index>(set_b[k])) = d.row(static_cast<Eigen::Index>(k));
  }
  return x;
}

Eigen::MatrixXd restrict_rows(const Eigen::MatrixXd& x, const std::vector<std::size_t>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    out.row(static_cast<Eigen::Index>(k)) = x.row(static_cast<Eigen::Index>(rows[k]));
  }
  return out;
}

Eigen::MatrixXd random_matrix(std::mt19937_64& engine, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = normal(engine);
  }
  return m;
}

void require_mode_match(const FilterBankSpec& spec, const FilterBankContext& ctx) {
  spec.validate();
  if (spec.mode != ctx.mode()) {
    throw Error(ErrorCode::mode_mismatch, "spec mode " + to_string(spec.mode) +
                                              " against a " + to_string(ctx.mode()) + " context");
  }
}

double default_tolerance(const FilterBankSpec& spec, const FilterBankContext& ctx) {
  if (ctx.mode() == FilterMode::polynomial &&
      ctx.fundamental().solver().effective_mode() == SolverMode::iterative) {
    return std::max(spec.tolerance, 1e-6);
  }
  return spec.tolerance;
}

}  // namespace

std::string to_string(FilterMode mode) {
  return mode == FilterMode::dense_spectral ? "dense" : "poly";
}

std::string to_string(FilterFamily family) {
  switch (family) {
    case FilterFamily::lazy: return "lazy";
    case FilterFamily::orthogonal_cosine: return "ortho-cosine";
    case FilterFamily::custom: return "custom";
  }
  return "custom";
}

FilterMode filter_mode_from_string(const std::string& s) {
  if (s == "dense" || s == "dense-spectral") return FilterMode::dense_spectral;
  if (s == "poly" || s == "polynomial") return FilterMode::polynomial;
  throw Error(ErrorCode::invalid_argument, "unknown filter mode '" + s + "'");
}

FilterFamily filter_family_from_string(const std::string& s) {
  if (s == "lazy") return FilterFamily::lazy;
  if (s == "ortho-cosine" || s == "orthogonal-cosine") return FilterFamily::orthogonal_cosine;
  if (s == "custom") return FilterFamily::custom;
  throw Error(ErrorCode::invalid_argument, "unknown filter family '" + s + "'");
}

bool FilterBankSpec::all_polynomial() const {
  return h0.is_polynomial() && h1.is_polynomial() && g0.is_polynomial() && g1.is_polynomial();
}

void FilterBankSpec::validate() const {
  if (mode == FilterMode::polynomial && !all_polynomial()) {
    throw Error(ErrorCode::not_polynomial,
                to_string(family) + " kernels have no polynomial implementation");
  }
}

FilterBankSpec lazy_spec() {
  FilterBankSpec s;
  s.h0 = FilterKernel::polynomial({1.0});
  s.h1 = FilterKernel::polynomial({0.0, 1.0});
  s.g0 = FilterKernel::polynomial({2.0, -1.0});
  s.g1 = FilterKernel::polynomial({1.0});
  s.mode = FilterMode::polynomial;
  s.family = FilterFamily::lazy;
  return s;
}

FilterBankSpec orthogonal_cosine_spec() {
  constexpr double quarter_pi = std::numbers::pi / 4.0;
  auto low = FilterKernel::closed_form(
      "sqrt2*cos(pi*l/4)", [](double l) { return std::numbers::sqrt2 * std::cos(quarter_pi * l); });
  auto high = FilterKernel::closed_form(
      "sqrt2*sin(pi*l/4)", [](double l) { return std::numbers::sqrt2 * std::sin(quarter_pi * l); });
  FilterBankSpec s;
  s.h0 = low;
  s.h1 = high;
  s.g0 = low;
  s.g1 = high;
  s.mode = FilterMode::dense_spectral;
  s.family = FilterFamily::orthogonal_cosine;
  return s;
}

FilterBankSpec custom_spec(std::vector<double> h0, std::vector<double> h1, std::vector<double> g0,
                           std::vector<double> g1, FilterMode mode) {
  FilterBankSpec s;
  s.h0 = FilterKernel::polynomial(std::move(h0));
  s.h1 = FilterKernel::polynomial(std::move(h1));
  s.g0 = FilterKernel::polynomial(std::move(g0));
  s.g1 = FilterKernel::polynomial(std::move(g1));
  s.mode = mode;
  s.family = FilterFamily::custom;
  return s;
}

FilterBankSpec with_mode(FilterBankSpec spec, FilterMode mode) {
  spec.mode = mode;
  spec.validate();
  return spec;
}

nlohmann::json spec_to_json(const FilterBankSpec& spec) {
  nlohmann::json j{{"family", to_string(spec.family)},
                   {"mode", to_string(spec.mode)},
                   {"tolerance", spec.tolerance}};
  if (spec.family == FilterFamily::custom) {
    j["h0"] = spec.h0.coefficients();
    j["h1"] = spec.h1.coefficients();
    j["g0"] = spec.g0.coefficients();
    j["g1"] = spec.g1.coefficients();
  }
  return j;
}

FilterBankSpec spec_from_json(const nlohmann::json& j) {
  try {
    const auto family = filter_family_from_string(j.at("family").get<std::string>());
    FilterBankSpec s;
    switch (family) {
      case FilterFamily::lazy: s = lazy_spec(); break;
      case FilterFamily::orthogonal_cosine: s = orthogonal_cosine_spec(); break;
      case FilterFamily::custom:
        s = custom_spec(j.at("h0").get<std::vector<double>>(), j.at("h1").get<std::vector<double>>(),
                        j.at("g0").get<std::vector<double>>(), j.at("g1").get<std::vector<double>>());
        break;
    }
    if (j.contains("mode")) s.mode = filter_mode_from_string(j.at("mode").get<std::string>());
    if (j.contains("tolerance")) s.tolerance = j.at("tolerance").get<double>();
    s.validate();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::parse, std::string("filter bank spec: ") + e.what());
  }
}

// -----------------------------------------------------------------------------
// FilterBankContext

FilterBankContext::FilterBankContext(SparseSym m, Partition p, const ContextOptions& options,
                                     StageTimes* times)
    : options_(options), m_(std::move(m)), partition_(std::move(p)) {
  {
    ScopedTimer timer(times ? &times->laplacian : nullptr);
    q_ = build_block_diag_q(m_, partition_);
  }
  init(times);
}

FilterBankContext::FilterBankContext(SparseSym m, SparseSym q, Partition p,
                                     const ContextOptions& options, StageTimes* times)
    : options_(options), m_(std::move(m)), q_(std::move(q)), partition_(std::move(p)) {
  init(times);
}

void FilterBankContext::init(StageTimes* times) {
  if (m_.size() != q_.size() || m_.size() != partition_.size()) {
    throw Error(ErrorCode::dimension_mismatch, "M, Q and partition sizes differ");
  }
  {
    ScopedTimer timer(times ? &times->laplacian : nullptr);
    q_a_ = extract_principal_block(q_, partition_.set_a());
    q_b_ = extract_principal_block(q_, partition_.set_b());
  }
  ScopedTimer timer(times ? &times->solve : nullptr);
  if (options_.mode == FilterMode::dense_spectral) {
    basis_ = mq_eigendecompose(m_, q_, options_.eigen);
  } else {
    fundamental_ = std::make_unique<FundamentalOperator>(m_, q_, options_.solver);
  }
}

const GftBasis& FilterBankContext::basis() const {
  if (!basis_) throw Error(ErrorCode::mode_mismatch, "context has no dense basis");
  return *basis_;
}

const FundamentalOperator& FilterBankContext::fundamental() const {
  if (!fundamental_) throw Error(ErrorCode::mode_mismatch, "context has no fundamental operator");
  return *fundamental_;
}

Eigen::MatrixXd FilterBankContext::apply(const FilterKernel& kernel, const Eigen::MatrixXd& x,
                                         StageTimes* times) const {
  if (static_cast<std::size_t>(x.rows()) != size()) {
    throw Error(ErrorCode::dimension_mismatch, "signal has " + std::to_string(x.rows()) +
                                                   " rows, operator has " + std::to_string(size()));
  }
  if (options_.mode == FilterMode::dense_spectral) {
    ScopedTimer timer(times ? &times->filtering : nullptr);
    return dense_spectral_filter(basis(), kernel, x);
  }
  if (!kernel.is_polynomial()) {
    throw Error(ErrorCode::not_polynomial, "kernel '" + kernel.name() + "' is not a polynomial");
  }
  const auto& c = kernel.coefficients();
  Eigen::MatrixXd y = c.back() * x;
  for (auto k = c.size() - 1; k-- > 0;) {
    y = fundamental().apply(y, times);
    if (c[k] != 0.0) y += c[k] * x;
  }
  return y;
}

// -----------------------------------------------------------------------------
// Analysis and synthesis

ChannelCoefficients analyze(const FilterBankSpec& spec, const FilterBankContext& ctx,
                            const Eigen::MatrixXd& x, StageTimes* times) {
  require_mode_match(spec, ctx);
  const auto& p = ctx.partition();
  ChannelCoefficients c;
  c.a = restrict_rows(ctx.apply(spec.h0, x, times), p.set_a());
  c.d = restrict_rows(ctx.apply(spec.h1, x, times), p.set_b());
  return c;
}

Eigen::MatrixXd synthesize(const FilterBankSpec& spec, const FilterBankContext& ctx,
                           const ChannelCoefficients& c, StageTimes* times) {
  require_mode_match(spec, ctx);
  const auto& p = ctx.partition();
  if (static_cast<std::size_t>(c.a.rows()) != p.set_a().size() ||
      static_cast<std::size_t>(c.d.rows()) != p.set_b().size() || c.a.cols() != c.d.cols()) {
    throw Error(ErrorCode::dimension_mismatch, "channel coefficients do not match the partition");
  }
  const Eigen::MatrixXd zero_a = Eigen::MatrixXd::Zero(c.a.rows(), c.a.cols());
  const Eigen::MatrixXd zero_d = Eigen::MatrixXd::Zero(c.d.rows(), c.d.cols());
  return ctx.apply(spec.g0, upsample(p, c.a, zero_d), times) +
         ctx.apply(spec.g1, upsample(p, zero_a, c.d), times);
}

double q_inner(const SparseSym& q, const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
  return (x.array() * (q.storage() * y).array()).sum();
}

double channel_inner(const FilterBankContext& ctx, const ChannelCoefficients& c1,
                     const ChannelCoefficients& c2) {
  return q_inner(ctx.q_a(), c1.a, c2.a) + q_inner(ctx.q_b(), c1.d, c2.d);
}

// -----------------------------------------------------------------------------
// Checks

Eigen::VectorXd lambda_grid(std::size_t points) {
  return Eigen::VectorXd::LinSpaced(static_cast<Eigen::Index>(std::max<std::size_t>(points, 2)),
                                    0.0, 2.0);
}

SpectralViolation pr_violation(const FilterBankSpec& spec, const Eigen::VectorXd& lambdas) {
  SpectralViolation v;
  double worst = -1.0;
  for (Eigen::Index k = 0; k < lambdas.size(); ++k) {
    const double l = lambdas(k);
    const double pr = std::abs(spec.h0(l) * spec.g0(l) + spec.h1(l) * spec.g1(l) - 2.0);
    const double alias =
        std::abs(spec.h0(l) * spec.g0(2.0 - l) - spec.h1(l) * spec.g1(2.0 - l));
    v.pr = std::max(v.pr, pr);
    v.alias = std::max(v.alias, alias);
    if (std::max(pr, alias) > worst) {
      worst = std::max(pr, alias);
      v.worst_lambda = l;
    }
  }
  return v;
}

double biorthogonality_violation(const FilterBankSpec& spec, const Eigen::VectorXd& lambdas) {
  double worst = 0.0;
  for (Eigen::Index k = 0; k < lambdas.size(); ++k) {
    const double l = lambdas(k);
    worst = std::max({worst, std::abs(spec.h0(l) - spec.g1(2.0 - l)),
                      std::abs(spec.h1(l) - spec.g0(2.0 - l))});
  }
  return worst;
}

double orthogonality_violation(const FilterBankSpec& spec, const Eigen::VectorXd& lambdas) {
  double worst = 0.0;
  for (Eigen::Index k = 0; k < lambdas.size(); ++k) {
    const double l = lambdas(k);
    const double h0 = spec.h0(l);
    const double h1 = spec.h1(l);
    worst = std::max({worst, std::abs(h0 * h0 + h1 * h1 - 2.0),
                      std::abs(h0 * spec.h0(2.0 - l) - h1 * spec.h1(2.0 - l))});
  }
  return worst;
}

nlohmann::json PrReport::to_json() const {
  return {{"eigenvalue_count", eigenvalue_count},
          {"evaluated_on_spectrum", evaluated_on_spectrum},
          {"max_pr_violation", max_pr_violation},
          {"max_alias_violation", max_alias_violation},
          {"worst_lambda", worst_lambda},
          {"trials", trials},
          {"max_roundtrip_error", max_roundtrip_error},
          {"tolerance", tolerance},
          {"spectral_passed", spectral_passed},
          {"roundtrip_passed", roundtrip_passed},
          {"passed", passed}};
}

PrReport check_pr(const FilterBankSpec& spec, const FilterBankContext& ctx, std::size_t trials,
                  std::uint64_t seed, std::optional<double> tol) {
  require_mode_match(spec, ctx);
  PrReport r;
  r.tolerance = tol.value_or(default_tolerance(spec, ctx));

  const Eigen::VectorXd lambdas = ctx.has_basis() ? ctx.basis().lambda : lambda_grid();
  r.evaluated_on_spectrum = ctx.has_basis();
  r.eigenvalue_count = static_cast<std::size_t>(lambdas.size());
  const auto v = pr_violation(spec, lambdas);
  r.max_pr_violation = v.pr;
  r.max_alias_violation = v.alias;
  r.worst_lambda = v.worst_lambda;

  auto engine = SeedStream(seed).engine();
  r.trials = trials;
  for (std::size_t t = 0; t < trials; ++t) {
    const Eigen::MatrixXd x = random_matrix(engine, static_cast<Eigen::Index>(ctx.size()), 1);
    const Eigen::MatrixXd y = synthesize(spec, ctx, analyze(spec, ctx, x));
    r.max_roundtrip_error = std::max(r.max_roundtrip_error, (y - x).norm() / x.norm());
  }
  r.spectral_passed = r.max_pr_violation <= r.tolerance && r.max_alias_violation <= r.tolerance;
  r.roundtrip_passed = r.max_roundtrip_error <= r.tolerance;
  r.passed = r.spectral_passed && r.roundtrip_passed;
  return r;
}

nlohmann::json OrthogonalityReport::to_json() const {
  return {{"trials", trials},
          {"max_inner_product_error", max_inner_product_error},
          {"max_adjoint_error", max_adjoint_error},
          {"min_norm_ratio", min_norm_ratio},
          {"max_norm_ratio", max_norm_ratio},
          {"tolerance", tolerance},
          {"passed", passed}};
}

OrthogonalityReport check_q_orthogonality(const FilterBankSpec& spec, const FilterBankContext& ctx,
                                          std::size_t trials, std::uint64_t seed,
                                          std::optional<double> tol) {
  require_mode_match(spec, ctx);
  OrthogonalityReport r;
  r.tolerance = tol.value_or(default_tolerance(spec, ctx));
  r.trials = trials;
  r.min_norm_ratio = std::numeric_limits<double>::infinity();

  const auto n = static_cast<Eigen::Index>(ctx.size());
  const auto na = static_cast<Eigen::Index>(ctx.partition().set_a().size());
  const auto nb = static_cast<Eigen::Index>(ctx.partition().set_b().size());
  auto engine = SeedStream(seed).engine();
  for (std::size_t t = 0; t < trials; ++t) {
    const Eigen::MatrixXd x = random_matrix(engine, n, 1);
    const Eigen::MatrixXd y = random_matrix(engine, n, 1);
    const auto tx = analyze(spec, ctx, x);
    const auto ty = analyze(spec, ctx, y);
    const double nx = std::sqrt(q_inner(ctx.q(), x, x));
    const double ny = std::sqrt(q_inner(ctx.q(), y, y));
    const double err = std::abs(channel_inner(ctx, tx, ty) - q_inner(ctx.q(), x, y)) / (nx * ny);
    r.max_inner_product_error = std::max(r.max_inner_product_error, err);

    const double ratio = std::sqrt(channel_inner(ctx, tx, tx)) / nx;
    r.min_norm_ratio = std::min(r.min_norm_ratio, ratio);
    r.max_norm_ratio = std::max(r.max_norm_ratio, ratio);

    // <T_s c, x>_Q against <c, T_a x>_Q on the channel side.
    ChannelCoefficients c{random_matrix(engine, na, 1), random_matrix(engine, nb, 1)};
    const double nc = std::sqrt(channel_inner(ctx, c, c));
    const Eigen::MatrixXd sc = synthesize(spec, ctx, c);
    const double adj = std::abs(q_inner(ctx.q(), x, sc) - channel_inner(ctx, tx, c)) / (nx * nc);
    r.max_adjoint_error = std::max(r.max_adjoint_error, adj);
  }
  r.passed = r.max_inner_product_error <= r.tolerance && r.max_adjoint_error <= r.tolerance;
  return r;
}

FrameBounds frame_bounds(const FilterBankSpec& spec, std::size_t grid_points) {
  const auto grid = lambda_grid(grid_points);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (Eigen::Index k = 0; k < grid.size(); ++k) {
    const double h0 = spec.h0(grid(k));
    const double h1 = spec.h1(grid(k));
    const double s = h0 * h0 + h1 * h1;
    lo = std::min(lo, s);
    hi = std::max(hi, s);
  }
  return {std::sqrt(0.5 * lo), std::sqrt(0.5 * hi)};
}

// -----------------------------------------------------------------------------
// Zero-DC wrapper

ZeroDcFilterBank zero_dc_wrap(FilterBankSpec spec, const Eigen::VectorXd& degrees) {
  for (Eigen::Index i = 0; i < degrees.size(); ++i) {
    if (!(degrees(i) > 0.0)) {
      throw Error(ErrorCode::zero_degree, "vertex " + std::to_string(i) + " has zero degree");
    }
  }
  return {std::move(spec), degrees.cwiseSqrt()};
}

ChannelCoefficients analyze(const ZeroDcFilterBank& bank, const FilterBankContext& ctx,
                            const Eigen::MatrixXd& x, StageTimes* times) {
  if (bank.sqrt_degree.size() != x.rows()) {
    throw Error(ErrorCode::dimension_mismatch, "degree vector does not match the signal");
  }
  return analyze(bank.spec, ctx, bank.sqrt_degree.asDiagonal() * x, times);
}

Eigen::MatrixXd synthesize(const ZeroDcFilterBank& bank, const FilterBankContext& ctx,
                           const ChannelCoefficients& c, StageTimes* times) {
  const Eigen::MatrixXd y = synthesize(bank.spec, ctx, c, times);
  if (bank.sqrt_degree.size() != y.rows()) {
    throw Error(ErrorCode::dimension_mismatch, "degree vector does not match the signal");
  }
  return bank.sqrt_degree.cwiseInverse().asDiagonal() * y;
}

}  // namespace mqfb
