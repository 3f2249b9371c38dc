#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "helpers.hpp"
#include "mqfb/error.hpp"
#include "mqfb/filterbank.hpp"
#include "mqfb/graph.hpp"
#include "mqfb/synthetic.hpp"

using namespace mqfb;
using mqfb::test::with_a;

namespace {

struct Case {
  SparseSym m;
  Partition p;
};

Case er_case(std::size_t n, std::uint64_t seed, double prob = 0.1) {
  const auto g = erdos_renyi_connected(n, prob, seed);
  return {combinatorial_laplacian(g),
          mix_components(random_partition(n, seed + 7), connected_components(g), seed)};
}

ContextOptions opts(FilterMode mode) {
  ContextOptions o;
  o.mode = mode;
  return o;
}

// Explicit dense analysis/synthesis matrices from the oracle basis, rows
// stacked as [A; B] in ascending vertex order.
struct DenseBank {
  Eigen::MatrixXd ta;
  Eigen::MatrixXd ts;
};

DenseBank dense_bank(const FilterBankSpec& spec, const Eigen::MatrixXd& m, const Eigen::MatrixXd& q,
                     const Partition& p) {
  const auto ob = test::oracle_basis(m, q);
  auto filt = [&](const FilterKernel& k) {
    Eigen::VectorXd r(ob.lambda.size());
    for (Eigen::Index i = 0; i < r.size(); ++i) r(i) = k(ob.lambda(i));
    return Eigen::MatrixXd(ob.u * r.asDiagonal() * ob.u.transpose() * q);
  };
  const Eigen::MatrixXd h0 = filt(spec.h0), h1 = filt(spec.h1), g0 = filt(spec.g0), g1 = filt(spec.g1);
  const auto n = m.rows();
  DenseBank b{Eigen::MatrixXd(n, n), Eigen::MatrixXd(n, n)};
  Eigen::Index r = 0;
  for (auto i : p.set_a()) {
    b.ta.row(r) = h0.row(static_cast<Eigen::Index>(i));
    b.ts.col(r++) = g0.col(static_cast<Eigen::Index>(i));
  }
  for (auto i : p.set_b()) {
    b.ta.row(r) = h1.row(static_cast<Eigen::Index>(i));
    b.ts.col(r++) = g1.col(static_cast<Eigen::Index>(i));
  }
  return b;
}

Eigen::VectorXd stack(const ChannelCoefficients& c) {
  Eigen::VectorXd v(c.a.rows() + c.d.rows());
  v << c.a.col(0), c.d.col(0);
  return v;
}

// h0 = 1, g1 = 1, g0 = 2 - l + c (1 - l)^3, h1(l) = g0(2 - l): PR for every c.
FilterBankSpec cubic_pr(double c, FilterMode mode = FilterMode::polynomial) {
  return custom_spec({1.0}, {-c, 1.0 + 3.0 * c, -3.0 * c, c}, {2.0 + c, -1.0 - 3.0 * c, 3.0 * c, -c},
                     {1.0}, mode);
}

}  // namespace

TEST_SUITE("filterbank") {

TEST_CASE("lazy kernels satisfy the PR identities exactly") {
  const auto s = lazy_spec();
  CHECK(s.mode == FilterMode::polynomial);
  CHECK(s.family == FilterFamily::lazy);
  CHECK(s.all_polynomial());
  const auto grid = lambda_grid();
  CHECK(grid.size() == 10000);
  CHECK(s.g0(0.0) * s.h0(0.0) + s.g1(0.0) * s.h1(0.0) == 2.0);
  const auto v = pr_violation(s, grid);
  CHECK(v.pr == 0.0);
  CHECK(v.alias <= 1e-15);
  CHECK(biorthogonality_violation(s, grid) <= 1e-15);
  CHECK(orthogonality_violation(s, grid) > 0.1);
}

TEST_CASE("orthogonal cosine kernels") {
  const auto s = orthogonal_cosine_spec();
  CHECK(s.mode == FilterMode::dense_spectral);
  CHECK(s.h0(0.0) == doctest::Approx(std::numbers::sqrt2));
  CHECK(std::abs(s.h1(0.0)) <= 1e-15);
  CHECK(std::abs(s.h0(2.0)) <= 1e-15);
  CHECK(s.h1(2.0) == doctest::Approx(std::numbers::sqrt2));
  CHECK(s.h0(1.0) == doctest::Approx(1.0));
  CHECK(s.h1(1.0) == doctest::Approx(1.0));
  CHECK(orthogonality_violation(s, lambda_grid()) <= 1e-14);
  CHECK(pr_violation(s, lambda_grid()).pr <= 1e-14);

  try {
    with_mode(s, FilterMode::polynomial);
    FAIL("expected NotPolynomial");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::not_polynomial);
  }
  auto poly = s;
  poly.mode = FilterMode::polynomial;
  const auto c = er_case(20, 1);
  const FilterBankContext ctx(c.m, c.p, opts(FilterMode::polynomial));
  CHECK_THROWS_AS(analyze(poly, ctx, Eigen::MatrixXd::Ones(20, 1)), Error);
  CHECK_THROWS_AS(ctx.apply(s.h0, Eigen::MatrixXd::Ones(20, 1)), Error);
}

TEST_CASE("mode mismatch and dimension errors") {
  const auto c = er_case(30, 2);
  const FilterBankContext dense(c.m, c.p, opts(FilterMode::dense_spectral));
  try {
    analyze(lazy_spec(), dense, Eigen::MatrixXd::Ones(30, 1));
    FAIL("expected ModeMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::mode_mismatch);
  }
  CHECK_THROWS_AS(dense.fundamental(), Error);
  const FilterBankContext poly(c.m, c.p);
  CHECK_THROWS_AS(poly.basis(), Error);
  CHECK_THROWS_AS(analyze(lazy_spec(), poly, Eigen::MatrixXd::Ones(29, 1)), Error);
  ChannelCoefficients bad{Eigen::MatrixXd::Zero(1, 1), Eigen::MatrixXd::Zero(1, 1)};
  CHECK_THROWS_AS(synthesize(lazy_spec(), poly, bad), Error);
}

TEST_CASE("lazy analysis") {
  const auto c = er_case(80, 3);
  const FilterBankContext ctx(c.m, c.p);
  std::mt19937_64 rng(1);
  const Eigen::MatrixXd x = test::random_matrix(rng, 80, 3);
  const auto co = analyze(lazy_spec(), ctx, x);
  CHECK(co.count() == 80);
  for (std::size_t k = 0; k < c.p.set_a().size(); ++k) {
    CHECK(co.a.row(static_cast<Eigen::Index>(k)) == x.row(static_cast<Eigen::Index>(c.p.set_a()[k])));
  }
  const auto ones = analyze(lazy_spec(), ctx, Eigen::MatrixXd::Ones(80, 1));
  CHECK(ones.d.cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("analysis and synthesis match explicit dense operators") {
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto c = er_case(40 + 10 * s, s);
    const Eigen::MatrixXd md = c.m.to_dense();
    const Eigen::MatrixXd qd = test::dense_block_q(md, c.p);
    std::mt19937_64 rng(s);
    const Eigen::MatrixXd x = test::random_vector(rng, md.rows());
    for (const auto& spec : {lazy_spec(), orthogonal_cosine_spec(), cubic_pr(0.3)}) {
      const auto db = dense_bank(spec, md, qd, c.p);
      const auto ctx = FilterBankContext(c.m, c.p, opts(spec.mode));
      const auto co = analyze(spec, ctx, x);
      const Eigen::VectorXd want = db.ta * x;
      CHECK((stack(co) - want).norm() <= 1e-9 * want.norm());
      const Eigen::VectorXd back = synthesize(spec, ctx, co).col(0);
      CHECK((back - db.ts * stack(co)).norm() <= 1e-9 * back.norm());
    }
  }
}

TEST_CASE("dense and polynomial modes agree") {
  const auto c = er_case(60, 9);
  const FilterBankContext dense(c.m, c.p, opts(FilterMode::dense_spectral));
  const FilterBankContext poly(c.m, c.p, opts(FilterMode::polynomial));
  std::mt19937_64 rng(5);
  const Eigen::MatrixXd x = test::random_matrix(rng, 60, 2);
  for (const auto& spec : {lazy_spec(), cubic_pr(0.5)}) {
    const auto cd = analyze(with_mode(spec, FilterMode::dense_spectral), dense, x);
    const auto cp = analyze(spec, poly, x);
    CHECK((cd.a - cp.a).norm() <= 1e-8 * x.norm());
    CHECK((cd.d - cp.d).norm() <= 1e-8 * x.norm());
    const Eigen::MatrixXd yd = synthesize(with_mode(spec, FilterMode::dense_spectral), dense, cd);
    const Eigen::MatrixXd yp = synthesize(spec, poly, cp);
    CHECK((yd - yp).norm() <= 1e-7 * x.norm());
  }
}

TEST_CASE("round trips") {
  const FilterBankContext empty_ctx = FilterBankContext(er_case(30, 4).m, er_case(30, 4).p);
  ChannelCoefficients zero{Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(empty_ctx.partition().set_a().size()), 1),
                           Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(empty_ctx.partition().set_b().size()), 1)};
  CHECK(synthesize(lazy_spec(), empty_ctx, zero).isZero(0.0));

  const auto g = random_knn_graph(500, 5, 3);
  const auto p = mix_components(random_partition(500, 3), connected_components(g), 3);
  const FilterBankContext ctx(combinatorial_laplacian(g), p);
  std::mt19937_64 rng(6);
  const Eigen::MatrixXd x = test::random_matrix(rng, 500, 3);
  CHECK((synthesize(lazy_spec(), ctx, analyze(lazy_spec(), ctx, x)) - x).norm() <= 1e-8 * x.norm());

  const auto c = er_case(200, 5);
  const FilterBankContext dctx(c.m, c.p, opts(FilterMode::dense_spectral));
  const auto cos = orthogonal_cosine_spec();
  const Eigen::MatrixXd y = test::random_matrix(rng, 200, 1);
  CHECK((synthesize(cos, dctx, analyze(cos, dctx, y)) - y).norm() <= 1e-8 * y.norm());
}

TEST_CASE("check_pr") {
  const auto c = er_case(50, 6);
  const FilterBankContext ctx(c.m, c.p);
  const auto lazy = check_pr(lazy_spec(), ctx, 5, 1);
  CHECK(lazy.passed);
  CHECK(lazy.max_pr_violation == 0.0);
  CHECK(lazy.max_alias_violation <= 1e-15);
  CHECK_FALSE(lazy.evaluated_on_spectrum);
  CHECK(lazy.tolerance == 1e-8);

  auto broken = lazy_spec();
  broken.g0 = FilterKernel::polynomial({2.1, -1.0});
  const auto br = check_pr(broken, ctx, 5, 1);
  CHECK_FALSE(br.passed);
  CHECK(br.max_pr_violation == doctest::Approx(0.1));
  CHECK(br.max_alias_violation == doctest::Approx(0.1));
  CHECK(br.max_roundtrip_error > 1e-3);

  const FilterBankContext dctx(c.m, c.p, opts(FilterMode::dense_spectral));
  const auto on_spectrum = check_pr(with_mode(broken, FilterMode::dense_spectral), dctx, 3, 1);
  CHECK(on_spectrum.evaluated_on_spectrum);
  CHECK(on_spectrum.eigenvalue_count == 50);
  CHECK(on_spectrum.max_pr_violation == doctest::Approx(0.1));

  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto cs = er_case(30 + 5 * s, 100 + s);
    const FilterBankContext cc(cs.m, cs.p, opts(FilterMode::dense_spectral));
    const auto r = check_pr(orthogonal_cosine_spec(), cc, 3, s);
    CHECK(r.passed);
    CHECK(r.max_roundtrip_error <= 1e-8);
  }

  SolverOptions cg;
  cg.mode = SolverMode::iterative;
  ContextOptions it;
  it.solver = cg;
  const FilterBankContext ictx(c.m, c.p, it);
  CHECK(check_pr(lazy_spec(), ictx, 2, 1).tolerance == 1e-6);
}

TEST_CASE("PR holds iff the spectral conditions hold") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> coef(-0.5, 0.5);
  std::uniform_int_distribution<int> which(0, 3);
  for (int t = 0; t < 40; ++t) {
    const auto c = er_case(20 + static_cast<std::size_t>(t) * 2, 300 + t, 0.15);
    const FilterBankContext ctx(c.m, c.p, opts(FilterMode::dense_spectral));
    auto spec = cubic_pr(coef(rng), FilterMode::dense_spectral);
    const bool perturb = t % 2 == 1;
    if (perturb) {
      // Bump one coefficient of one kernel.
      std::vector<FilterKernel*> ks{&spec.h0, &spec.h1, &spec.g0, &spec.g1};
      auto* k = ks[static_cast<std::size_t>(which(rng))];
      auto co = k->coefficients();
      co[static_cast<std::size_t>(which(rng)) % co.size()] += 1e-3 + std::abs(coef(rng));
      *k = FilterKernel::polynomial(co);
    }
    const auto r = check_pr(spec, ctx, 3, static_cast<std::uint64_t>(t));
    const bool analytic = r.spectral_passed;
    const bool numeric = r.roundtrip_passed;
    CHECK(analytic == numeric);
    CHECK(analytic == !perturb);
  }
}

TEST_CASE("Q-orthogonality") {
  // Bipartite graph, normalized Laplacian, Q = I.
  const auto bg = random_bipartite(60, 0.15, 4);
  const auto nl = normalized_laplacian(bg.graph);
  const FilterBankContext bctx(nl, bg.partition, opts(FilterMode::dense_spectral));
  CHECK(bctx.q() == SparseSym::identity(60));
  const auto cos = orthogonal_cosine_spec();
  const auto r = check_q_orthogonality(cos, bctx, 10, 3);
  CHECK(r.passed);
  CHECK(r.min_norm_ratio == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(r.max_norm_ratio == doctest::Approx(1.0).epsilon(1e-8));

  const auto tri = combinatorial_laplacian(test::triangle());
  const FilterBankContext tctx(tri, with_a(3, {0}), opts(FilterMode::dense_spectral));
  const auto tr = check_q_orthogonality(cos, tctx, 20, 5);
  CHECK(tr.passed);
  CHECK(tr.max_inner_product_error <= 1e-8);
  CHECK(tr.max_adjoint_error <= 1e-8);

  const auto c = er_case(70, 8);
  const FilterBankContext lctx(c.m, c.p);
  const auto lazy = check_q_orthogonality(lazy_spec(), lctx, 30, 9);
  CHECK_FALSE(lazy.passed);
  const auto fb = frame_bounds(lazy_spec());
  CHECK(lazy.min_norm_ratio >= fb.alpha - 1e-6);
  CHECK(lazy.max_norm_ratio <= fb.beta + 1e-6);
}

TEST_CASE("orthogonal specs are PR") {
  const auto c = er_case(45, 12);
  const FilterBankContext ctx(c.m, c.p, opts(FilterMode::dense_spectral));
  for (const auto& spec : {orthogonal_cosine_spec(), with_mode(lazy_spec(), FilterMode::dense_spectral),
                           cubic_pr(0.2, FilterMode::dense_spectral)}) {
    if (check_q_orthogonality(spec, ctx, 5, 1).passed) CHECK(check_pr(spec, ctx, 5, 2).passed);
  }
}

TEST_CASE("frame bounds") {
  const auto cos = frame_bounds(orthogonal_cosine_spec());
  CHECK(cos.alpha == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(cos.beta == doctest::Approx(1.0).epsilon(1e-12));
  const auto lazy = frame_bounds(lazy_spec());
  CHECK(std::abs(lazy.alpha * lazy.alpha - 0.5) <= 1e-12);
  CHECK(std::abs(lazy.beta * lazy.beta - 2.5) <= 1e-12);
  const auto flat = frame_bounds(custom_spec({1.0}, {1.0}, {1.0}, {1.0}));
  CHECK(flat.alpha == 1.0);
  CHECK(flat.beta == 1.0);
}

TEST_CASE("zero-DC wrapper") {
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto bg = random_bipartite(50, 0.15, 20 + s);
    const Eigen::VectorXd deg = bg.graph.degrees();
    const Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(50, 1);

    // M = L gives Q = D; constants have no detail.
    const auto l = combinatorial_laplacian(bg.graph);
    const FilterBankContext lctx(l, bg.partition);
    const Eigen::VectorXd qdiag = lctx.q().diagonal_values();
    CHECK(lctx.q().is_diagonal());
    CHECK(qdiag == deg);
    CHECK(analyze(lazy_spec(), lctx, ones).d.cwiseAbs().maxCoeff() <= 1e-10);

    // The wrapped normalized bank does the same, and its detail channel is
    // the D^{1/2}-scaled detail of the (L, D) bank.
    const FilterBankContext nctx(normalized_laplacian(bg.graph), bg.partition);
    const auto wrapped = zero_dc_wrap(lazy_spec(), deg);
    CHECK(analyze(wrapped, nctx, ones).d.cwiseAbs().maxCoeff() <= 1e-10);
    std::mt19937_64 rng(s);
    const Eigen::MatrixXd x = test::random_matrix(rng, 50, 2);
    const auto cw = analyze(wrapped, nctx, x);
    const auto cl = analyze(lazy_spec(), lctx, x);
    for (std::size_t k = 0; k < bg.partition.set_b().size(); ++k) {
      const auto i = static_cast<Eigen::Index>(bg.partition.set_b()[k]);
      const auto kk = static_cast<Eigen::Index>(k);
      CHECK((cw.d.row(kk) - std::sqrt(deg(i)) * cl.d.row(kk)).norm() <= 1e-10 * x.norm());
    }
    CHECK((synthesize(wrapped, nctx, cw) - x).norm() <= 1e-10 * x.norm());
  }
  Eigen::VectorXd bad = Eigen::VectorXd::Ones(4);
  bad(2) = 0.0;
  try {
    zero_dc_wrap(lazy_spec(), bad);
    FAIL("expected ZeroDegree");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::zero_degree);
  }
}

TEST_CASE("spec JSON round trip") {
  const auto spec = cubic_pr(0.25);
  const auto back = spec_from_json(spec_to_json(spec));
  CHECK(back.family == FilterFamily::custom);
  CHECK(back.h1.coefficients() == spec.h1.coefficients());
  CHECK(back.g0.coefficients() == spec.g0.coefficients());
  CHECK(spec_from_json(spec_to_json(orthogonal_cosine_spec())).h0(0.5) ==
        orthogonal_cosine_spec().h0(0.5));
  CHECK(spec_from_json({{"family", "lazy"}, {"tolerance", 1e-6}}).tolerance == 1e-6);
  CHECK_THROWS_AS(spec_from_json({{"family", "custom"}, {"h0", {1.0}}}), Error);
  CHECK_THROWS_AS(spec_from_json({{"family", "ortho-cosine"}, {"mode", "poly"}}), Error);
  CHECK_THROWS_AS(spec_from_json({{"family", "wavelet"}}), Error);
}

TEST_CASE("critical sampling for every partition size") {
  const auto g = erdos_renyi_connected(40, 0.2, 3);
  const auto m = combinatorial_laplacian(g);
  for (std::size_t na : {1ul, 5ul, 20ul, 39ul}) {
    std::vector<std::size_t> a(na);
    for (std::size_t i = 0; i < na; ++i) a[i] = i;
    const auto p = Partition::from_set_a(40, a);
    const FilterBankContext ctx(m, p);
    const auto c = analyze(lazy_spec(), ctx, Eigen::MatrixXd::Ones(40, 2));
    CHECK(c.count() == 40);
    CHECK(static_cast<std::size_t>(c.a.rows()) == na);
  }
}

}
