#include "mqfb/cli.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <random>

#include <CLI11.hpp>

#include "mqfb/error.hpp"
#include "mqfb/filterbank.hpp"
#include "mqfb/gft.hpp"
#include "mqfb/graph.hpp"
#include "mqfb/io.hpp"
#include "mqfb/multires.hpp"
#include "mqfb/point_cloud.hpp"
#include "mqfb/rng.hpp"
#include "mqfb/synthetic.hpp"
#include "mqfb/version.hpp"

namespace mqfb::cli {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

FilterBankSpec resolve_spec(const RunConfig& c) {
  FilterBankSpec spec;
  if (!c.spec_file.empty()) {
    std::ifstream in(c.spec_file);
    if (!in) throw Error(ErrorCode::io, "cannot read " + c.spec_file);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::parse, c.spec_file + ": " + e.what());
    }
    spec = spec_from_json(j);
  } else {
    switch (filter_family_from_string(c.family)) {
      case FilterFamily::lazy: spec = lazy_spec(); break;
      case FilterFamily::orthogonal_cosine: spec = orthogonal_cosine_spec(); break;
      case FilterFamily::custom:
        throw Error(ErrorCode::invalid_argument, "the custom family needs --spec");
    }
  }
  if (!c.mode.empty()) spec.mode = filter_mode_from_string(c.mode);
  if (c.tol) spec.tolerance = *c.tol;
  spec.validate();
  return spec;
}

SolverOptions solver_options(const RunConfig& c) {
  SolverOptions s;
  if (c.solver == "direct") {
    s.mode = SolverMode::direct;
  } else if (c.solver == "cg" || c.solver == "iterative") {
    s.mode = SolverMode::iterative;
  } else {
    throw Error(ErrorCode::invalid_argument, "unknown solver '" + c.solver + "'");
  }
  return s;
}

nlohmann::json report_header(const RunConfig& c) {
  return {{"version", kVersion}, {"config", c.to_json()}};
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::io, "cannot create " + dir.string() + ": " + ec.message());
}

nlohmann::json times_json(const StageTimes& t) {
  return {{"knn", t.knn},
          {"laplacian", t.laplacian},
          {"partition", t.partition},
          {"filtering", t.filtering},
          {"solve", t.solve}};
}

// FNV-1a over the raw bytes of every coefficient block.
std::string coefficient_digest(const DecompositionTree& tree) {
  std::uint64_t h = 1469598103934665603ull;
  auto feed = [&](const Eigen::MatrixXd& m) {
    const auto* bytes = reinterpret_cast<const unsigned char*>(m.data());
    for (std::size_t i = 0; i < static_cast<std::size_t>(m.size()) * sizeof(double); ++i) {
      h = (h ^ bytes[i]) * 1099511628211ull;
    }
  };
  for (const auto& l : tree.levels) feed(l.detail);
  feed(tree.root);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

double relative_error(const Eigen::MatrixXd& y, const Eigen::MatrixXd& x) {
  const double nx = x.norm();
  return nx > 0.0 ? (y - x).norm() / nx : (y - x).norm();
}

// ---------------------------------------------------------------------------
// verify

struct VerifyCase {
  Graph graph;
  Partition partition;
  std::string source;
};

VerifyCase make_case(const RunConfig& c, std::size_t index) {
  const SeedStream stream = SeedStream(c.seed).split(index);
  if (!c.inputs.empty()) {
    Graph g(io::read_matrix_market(fs::path(c.inputs.at(index))));
    Partition p = c.partition_file.empty()
                      ? mix_components(random_partition(g.size(), stream.split(2).seed()),
                                       connected_components(g), stream.split(3).seed())
                      : io::read_partition(c.partition_file);
    return {std::move(g), std::move(p), c.inputs.at(index)};
  }
  if (c.n_min < 3 || c.n_max < c.n_min) {
    throw Error(ErrorCode::invalid_argument, "need 3 <= n-min <= n-max");
  }
  auto engine = stream.split(0).engine();
  const std::size_t n = std::uniform_int_distribution<std::size_t>(c.n_min, c.n_max)(engine);
  const auto graph_seed = stream.split(1).seed();
  if (c.generator == "bipartite") {
    auto b = random_bipartite(n, c.p, graph_seed);
    return {std::move(b.graph), std::move(b.partition), "bipartite"};
  }
  Graph g;
  if (c.generator == "er") {
    g = erdos_renyi_connected(n, c.p, graph_seed);
  } else if (c.generator == "knn") {
    g = random_knn_graph(n, c.knn_k, graph_seed);
  } else {
    throw Error(ErrorCode::invalid_argument, "unknown generator '" + c.generator + "'");
  }
  Partition p = mix_components(random_partition(n, stream.split(2).seed()),
                               connected_components(g), stream.split(3).seed());
  return {std::move(g), std::move(p), c.generator};
}

struct InvariantTally {
  std::size_t cases = 0;
  std::size_t failures = 0;
  double worst = 0.0;
};

}  // namespace

nlohmann::json RunConfig::to_json() const {
  nlohmann::json j{{"command", command},   {"inputs", inputs},
                   {"k", k},               {"levels", levels},
                   {"seed", seed},         {"family", family},
                   {"spec_file", spec_file}, {"operator", op},
                   {"mode", mode},         {"baseline", baseline},
                   {"out", out},           {"solver", solver}};
  j["tol"] = tol ? nlohmann::json(*tol) : nlohmann::json(nullptr);
  if (command == "verify") {
    j["graphs"] = graphs;
    j["generator"] = generator;
    j["n_min"] = n_min;
    j["n_max"] = n_max;
    j["p"] = p;
    j["knn_k"] = knn_k;
    j["identity_q"] = identity_q;
    j["trials"] = trials;
    j["partition_file"] = partition_file;
  } else {
    j["synthetic"] = synthetic;
    j["attributes"] = attributes;
    j["bfb_k"] = bfb_k;
    j["sizes"] = sizes;
    j["frames"] = frames;
    j["cloud"] = cloud;
  }
  return j;
}

int cmd_verify(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const FilterBankSpec spec = resolve_spec(c);
  const OperatorKind op = operator_kind_from_string(c.op);
  const double tol = c.tol.value_or(1e-8);
  const bool orthogonal = orthogonality_violation(spec, lambda_grid()) <= tol;
  const FrameBounds bounds = frame_bounds(spec);
  const std::size_t count = c.inputs.empty() ? c.graphs : c.inputs.size();

  std::map<std::string, InvariantTally> tally;
  auto record = [&](const std::string& name, bool ok, double value) {
    auto& t = tally[name];
    ++t.cases;
    t.failures += ok ? 0 : 1;
    t.worst = std::max(t.worst, value);
  };

  nlohmann::json cases = nlohmann::json::array();
  for (std::size_t i = 0; i < count; ++i) {
    const VerifyCase vc = make_case(c, i);
    const SparseSym m = op == OperatorKind::combinatorial ? combinatorial_laplacian(vc.graph)
                                                          : normalized_laplacian(vc.graph);
    const SparseSym q =
        c.identity_q ? SparseSym::identity(m.size()) : build_block_diag_q(m, vc.partition);
    const GftBasis basis = mq_eigendecompose(m, q);
    const auto fold = verify_spectral_folding(basis, vc.partition, tol, false);
    const auto spectrum = spectrum_properties(basis, vc.partition);

    ContextOptions opts;
    opts.mode = spec.mode;
    opts.solver = solver_options(c);
    const FilterBankContext ctx(m, q, vc.partition, opts);
    const auto seeds = SeedStream(c.seed).split(i).split(4);
    const auto pr = check_pr(spec, ctx, c.trials, seeds.split(0).seed(), c.tol);
    const auto orth = check_q_orthogonality(spec, ctx, c.trials, seeds.split(1).seed(), c.tol);

    record("spectral_folding", fold.passed,
           std::max(fold.max_vector_residual, fold.max_subspace_residual));
    record("spectrum_range", spectrum.in_range,
           std::max(-spectrum.min_lambda, spectrum.max_lambda - 2.0));
    record("spectrum_symmetry", spectrum.symmetry_distance <= tol, spectrum.symmetry_distance);
    record("lambda_one_multiplicity", spectrum.count_at_one >= spectrum.required_at_one,
           static_cast<double>(spectrum.required_at_one) - static_cast<double>(spectrum.count_at_one));
    record("perfect_reconstruction", pr.passed,
           std::max({pr.max_pr_violation, pr.max_alias_violation, pr.max_roundtrip_error}));
    if (orthogonal) {
      record("parseval", orth.passed, std::max(orth.max_inner_product_error, orth.max_adjoint_error));
    } else {
      const bool inside = orth.min_norm_ratio >= bounds.alpha - 1e-6 &&
                          orth.max_norm_ratio <= bounds.beta + 1e-6;
      record("frame_bounds", inside,
             std::max(bounds.alpha - orth.min_norm_ratio, orth.max_norm_ratio - bounds.beta));
    }

    cases.push_back({{"index", i},
                     {"source", vc.source},
                     {"n", vc.graph.size()},
                     {"edges", vc.graph.edge_count()},
                     {"size_a", vc.partition.set_a().size()},
                     {"size_b", vc.partition.set_b().size()},
                     {"bipartite", is_bipartite_on(vc.graph, vc.partition)},
                     {"q_is_identity", q == SparseSym::identity(m.size())},
                     {"folding", fold.to_json()},
                     {"spectrum", spectrum.to_json()},
                     {"pr", pr.to_json()},
                     {"orthogonality", orth.to_json()}});
  }

  nlohmann::json summary = nlohmann::json::object();
  std::vector<std::string> failed;
  for (const auto& [name, t] : tally) {
    summary[name] = {{"cases", t.cases}, {"failures", t.failures}, {"worst", t.worst},
                     {"passed", t.failures == 0}};
    if (t.failures) failed.push_back(name);
  }
  nlohmann::json report = report_header(c);
  report["spec"] = spec_to_json(spec);
  report["frame_bounds"] = {{"alpha", bounds.alpha}, {"beta", bounds.beta}};
  report["orthogonal_spec"] = orthogonal;
  report["summary"] = summary;
  report["failed"] = failed;
  report["passed"] = failed.empty();
  report["cases"] = cases;

  if (c.out.empty()) {
    out << report.dump(2) << '\n';
  } else {
    write_json(c.out, report);
  }
  for (const auto& name : failed) {
    err << "FAIL " << name << ": " << tally[name].failures << " of " << tally[name].cases
        << " cases (worst " << tally[name].worst << ")\n";
  }
  if (failed.empty()) err << "verify: all invariants hold on " << count << " graphs\n";
  return failed.empty() ? kOk : kCheckFailed;
}

namespace {

PointCloud input_cloud(const RunConfig& c, std::string& frame) {
  if (c.synthetic > 0) {
    frame = "synthetic";
    return synthetic_cloud(c.synthetic, SeedStream(c.seed).split(1000).seed());
  }
  if (c.inputs.empty()) throw Error(ErrorCode::invalid_argument, "need --input or --synthetic");
  frame = fs::path(c.inputs.front()).stem().string();
  return load_ply(c.inputs.front(), c.attributes);
}

DecomposeOptions decompose_options(const RunConfig& c) {
  DecomposeOptions o;
  o.k = c.k;
  o.levels = c.levels;
  o.seed = c.seed;
  o.op = operator_kind_from_string(c.op);
  o.solver = solver_options(c);
  return o;
}

struct ArmResult {
  std::string name;
  std::size_t k;
  DecompositionTree tree;
  StageTimes times;
  double decompose_seconds = 0.0;
  double reconstruct_seconds = 0.0;
  double error = 0.0;
};

ArmResult run_arm(const std::string& name, const PointCloud& cloud, const FilterBankSpec& spec,
                  const DecomposeOptions& options) {
  ArmResult r{name, options.k, {}, {}};
  auto t0 = Clock::now();
  r.tree = decompose(cloud, spec, options, &r.times);
  r.decompose_seconds = seconds_since(t0);
  t0 = Clock::now();
  ContextOptions ctx{spec.mode, options.solver, options.eigen};
  const Eigen::MatrixXd y = reconstruct(r.tree, ctx, &r.times);
  r.reconstruct_seconds = seconds_since(t0);
  r.error = relative_error(y, cloud.attributes);
  return r;
}

std::vector<CsvRow> csv_rows(const std::string& frame, const ArmResult& arm,
                             const std::vector<ApproximationResult>& sweep) {
  std::vector<CsvRow> rows;
  for (const auto& a : sweep) {
    rows.push_back({frame, arm.k, arm.tree.meta.levels_realized, to_string(arm.tree.spec.family),
                    a.m_over_n, a.psnr, arm.decompose_seconds});
  }
  return rows;
}

nlohmann::json sweep_json(const std::vector<ApproximationResult>& sweep) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& a : sweep) {
    j.push_back({{"zeroed_levels", a.zeroed_levels},
                 {"keep_nominal", a.keep_nominal},
                 {"m_over_n", a.m_over_n},
                 {"psnr", a.psnr}});
  }
  return j;
}

}  // namespace

int cmd_decompose(const RunConfig& c, std::ostream& out, std::ostream& err) {
  if (c.out.empty()) throw Error(ErrorCode::invalid_argument, "decompose needs --out");
  const FilterBankSpec spec = resolve_spec(c);
  std::string frame;
  const PointCloud cloud = input_cloud(c, frame);
  const fs::path dir(c.out);
  ensure_dir(dir);

  std::vector<std::pair<std::string, DecomposeOptions>> arms;
  arms.emplace_back("proposed", decompose_options(c));
  if (baseline_from_string(c.baseline) == Baseline::bipartite) {
    for (auto kb : c.bfb_k) {
      auto o = decompose_options(c);
      o.k = kb;
      o.baseline = Baseline::bipartite;
      arms.emplace_back("bipartite_k" + std::to_string(kb), o);
    }
  }

  nlohmann::json report = report_header(c);
  report["spec"] = spec_to_json(spec);
  report["frame"] = frame;
  report["n"] = cloud.size();
  report["arms"] = nlohmann::json::array();
  for (const auto& [name, options] : arms) {
    ArmResult arm = run_arm(name, cloud, spec, options);
    const std::string suffix = name == "proposed" ? "" : "_" + name;
    save_tree(dir / ("tree" + suffix), arm.tree);
    const ContextOptions ctx{spec.mode, options.solver, options.eigen};
    const auto sweep = approximation_sweep(arm.tree, cloud.attributes, ctx);
    const fs::path csv = dir / ("approx" + suffix + ".csv");
    fs::remove(csv);
    append_approximation_csv(csv, csv_rows(frame, arm, sweep));
    report["arms"].push_back({{"arm", name},
                              {"k", options.k},
                              {"tree", arm.tree.meta.to_json()},
                              {"coefficient_count", arm.tree.coefficient_count()},
                              {"coefficient_digest", coefficient_digest(arm.tree)},
                              {"roundtrip_relative_error", arm.error},
                              {"approximation", sweep_json(sweep)},
                              {"csv", csv.string()},
                              {"timing", {{"stages", times_json(arm.times)},
                                          {"decompose_seconds", arm.decompose_seconds},
                                          {"reconstruct_seconds", arm.reconstruct_seconds}}}});
    err << name << ": " << arm.tree.meta.levels_realized << " levels, round-trip error "
        << arm.error << ", " << arm.decompose_seconds << " s\n";
  }
  write_json(dir / "report.json", report);
  out << (dir / "report.json").string() << '\n';
  return kOk;
}

int cmd_reconstruct(const RunConfig& c, std::ostream& out, std::ostream& err) {
  if (c.inputs.empty()) throw Error(ErrorCode::invalid_argument, "reconstruct needs --input TREE_DIR");
  if (c.out.empty()) throw Error(ErrorCode::invalid_argument, "reconstruct needs --out");
  const DecompositionTree tree = load_tree(c.inputs.front());
  ContextOptions ctx{tree.spec.mode, solver_options(c), {}};
  const auto t0 = Clock::now();
  const Eigen::MatrixXd y = reconstruct(tree, ctx);
  const double secs = seconds_since(t0);

  const fs::path dir(c.out);
  ensure_dir(dir);
  nlohmann::json report = report_header(c);
  report["tree"] = tree.meta.to_json();
  report["seconds"] = secs;
  if (!c.cloud.empty()) {
    const PointCloud original = load_ply(c.cloud, tree.meta.attribute_names);
    if (original.size() != tree.meta.n || original.channels() != tree.meta.channels) {
      throw Error(ErrorCode::dimension_mismatch, "--cloud does not match the tree");
    }
    PointCloud rebuilt = original;
    rebuilt.attributes = y;
    save_ply(dir / "reconstructed.ply", rebuilt);
    const auto sweep = approximation_sweep(tree, original.attributes, ctx);
    const fs::path csv = dir / "approx.csv";
    fs::remove(csv);
    std::vector<CsvRow> rows;
    for (const auto& a : sweep) {
      rows.push_back({fs::path(c.cloud).stem().string(), tree.meta.k, tree.meta.levels_realized,
                      to_string(tree.spec.family), a.m_over_n, a.psnr, secs});
    }
    append_approximation_csv(csv, rows);
    report["roundtrip_relative_error"] = relative_error(y, original.attributes);
    report["psnr"] = psnr(y, original.attributes);
    report["approximation"] = sweep_json(sweep);
  } else {
    io::write_csv(dir / "attributes.csv", y);
  }
  write_json(dir / "report.json", report);
  err << "reconstructed " << y.rows() << " points in " << secs << " s\n";
  out << (dir / "report.json").string() << '\n';
  return kOk;
}

int cmd_bench(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const FilterBankSpec spec = resolve_spec(c);
  std::vector<std::size_t> sizes = c.sizes;
  if (sizes.empty()) sizes.push_back(c.synthetic > 0 ? c.synthetic : 10000);

  std::ostringstream csv;
  csv << "frame,n,arm,K,L,edges,knn,laplacian,partition,filtering,solve,stage_sum,total,"
         "decompose_seconds,reconstruct_seconds,relative_error,coefficient_digest\n";
  nlohmann::json rows = nlohmann::json::array();
  std::vector<double> log_edges, log_cost;
  std::map<std::string, double> arm_totals;

  for (auto n : sizes) {
    for (std::size_t f = 0; f < c.frames; ++f) {
      const PointCloud cloud = synthetic_cloud(n, SeedStream(c.seed).split(1000 + f).seed());
      std::vector<std::pair<std::string, DecomposeOptions>> arms;
      arms.emplace_back("proposed", decompose_options(c));
      for (auto kb : c.bfb_k) {
        auto o = decompose_options(c);
        o.k = kb;
        o.baseline = Baseline::bipartite;
        arms.emplace_back("bipartite", o);
      }
      for (const auto& [name, options] : arms) {
        const ArmResult arm = run_arm(name, cloud, spec, options);
        std::size_t edges = 0;
        for (const auto& l : arm.tree.levels) edges += l.graph.edge_count();
        const double total = arm.decompose_seconds + arm.reconstruct_seconds;
        const auto digest = coefficient_digest(arm.tree);
        csv << f << ',' << n << ',' << name << ',' << options.k << ','
            << arm.tree.meta.levels_realized << ',' << edges << ',' << arm.times.knn << ','
            << arm.times.laplacian << ',' << arm.times.partition << ',' << arm.times.filtering
            << ',' << arm.times.solve << ',' << arm.times.sum() << ',' << total << ','
            << arm.decompose_seconds << ',' << arm.reconstruct_seconds << ',' << arm.error << ','
            << digest << '\n';
        rows.push_back({{"frame", f},
                        {"n", n},
                        {"arm", name},
                        {"k", options.k},
                        {"edges", edges},
                        {"relative_error", arm.error},
                        {"coefficient_digest", digest},
                        {"timing", {{"stages", times_json(arm.times)},
                                    {"stage_sum", arm.times.sum()},
                                    {"total", total},
                                    {"decompose_seconds", arm.decompose_seconds},
                                    {"reconstruct_seconds", arm.reconstruct_seconds}}}});
        arm_totals[name + "_k" + std::to_string(options.k)] += arm.decompose_seconds;
        if (name == "proposed") {
          log_edges.push_back(std::log(static_cast<double>(edges)));
          log_cost.push_back(std::log(arm.times.filtering + arm.times.solve));
        }
        err << "n=" << n << " frame " << f << ' ' << name << " K=" << options.k << ": "
            << total << " s\n";
      }
    }
  }

  nlohmann::json report = report_header(c);
  report["spec"] = spec_to_json(spec);
  report["rows"] = rows;
  report["decompose_seconds_by_arm"] = arm_totals;
  if (sizes.size() > 1) {
    // Least-squares slope of log(filtering + solve) against log(edges).
    const auto m = static_cast<double>(log_edges.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < log_edges.size(); ++i) {
      sx += log_edges[i];
      sy += log_cost[i];
      sxx += log_edges[i] * log_edges[i];
      sxy += log_edges[i] * log_cost[i];
    }
    report["filtering_scaling_slope"] = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  }
  if (c.out.empty()) {
    out << csv.str();
  } else {
    const fs::path dir(c.out);
    ensure_dir(dir);
    std::ofstream f(dir / "timing.csv");
    if (!f) throw Error(ErrorCode::io, "cannot write " + (dir / "timing.csv").string());
    f << csv.str();
    write_json(dir / "bench.json", report);
    out << (dir / "timing.csv").string() << '\n';
  }
  return kOk;
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Two-channel graph filter banks on the (M,Q) graph Fourier transform", "mqfb"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  RunConfig c;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--input", c.inputs, "Input files (PLY cloud, Matrix Market graph, tree dir)");
    sub->add_option("--seed", c.seed, "Seed for every random draw");
    sub->add_option("--family", c.family, "Filter family")
        ->check(CLI::IsMember({"lazy", "ortho-cosine"}));
    sub->add_option("--spec", c.spec_file, "Filter bank spec JSON (overrides --family)");
    sub->add_option("--operator", c.op, "Variation operator")->check(CLI::IsMember({"comb", "norm"}));
    sub->add_option("--mode", c.mode, "Filter implementation")->check(CLI::IsMember({"dense", "poly"}));
    sub->add_option("--tol", c.tol, "Tolerance for the checks");
    sub->add_option("--out", c.out, "Output path");
    sub->add_option("--solver", c.solver, "SPD solver")->check(CLI::IsMember({"direct", "cg"}));
  };
  auto pipeline = [&](CLI::App* sub) {
    sub->add_option("--k", c.k, "KNN neighbours")->check(CLI::PositiveNumber);
    sub->add_option("--levels", c.levels, "Decomposition levels")->check(CLI::PositiveNumber);
    sub->add_option("--baseline", c.baseline, "Also run the bipartite baseline")
        ->check(CLI::IsMember({"none", "bipartite"}));
    sub->add_option("--bfb-k", c.bfb_k, "KNN neighbours for the bipartite arms")->delimiter(',');
    sub->add_option("--synthetic", c.synthetic, "Use a generated cloud with this many points");
    sub->add_option("--attr", c.attributes, "Attribute properties to read from the PLY")->delimiter(',');
  };

  auto* verify = app.add_subcommand("verify", "Check folding, PR and Parseval on a graph battery");
  common(verify);
  verify->add_option("--graphs", c.graphs, "Generated graphs");
  verify->add_option("--generator", c.generator, "Graph generator")
      ->check(CLI::IsMember({"er", "knn", "bipartite"}));
  verify->add_option("--n-min", c.n_min);
  verify->add_option("--n-max", c.n_max);
  verify->add_option("--p", c.p, "Edge probability");
  verify->add_option("--knn-k", c.knn_k, "Neighbours for the knn generator");
  verify->add_option("--trials", c.trials, "Random round trips per graph");
  verify->add_option("--partition", c.partition_file, "Partition file for --input graphs");
  verify->add_flag("--identity-q", c.identity_q, "Use Q = I (deliberate misuse)");

  auto* dec = app.add_subcommand("decompose", "Multiresolution decomposition of a point cloud");
  common(dec);
  pipeline(dec);

  auto* rec = app.add_subcommand("reconstruct", "Invert a saved decomposition");
  common(rec);
  rec->add_option("--cloud", c.cloud, "Original cloud, for positions and PSNR");

  auto* bench = app.add_subcommand("bench", "Stage timings for both arms");
  common(bench);
  pipeline(bench);
  bench->add_option("--sizes", c.sizes, "Synthetic cloud sizes")->delimiter(',');
  bench->add_option("--frames", c.frames, "Frames per size");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n';
    return kUsage;
  }

  try {
    if (verify->parsed()) {
      c.command = "verify";
      return cmd_verify(c, out, err);
    }
    if (dec->parsed()) {
      c.command = "decompose";
      return cmd_decompose(c, out, err);
    }
    if (rec->parsed()) {
      c.command = "reconstruct";
      return cmd_reconstruct(c, out, err);
    }
    c.command = "bench";
    return cmd_bench(c, out, err);
  } catch (const Error& e) {
    err << e.what() << '\n';
    switch (e.code()) {
      case ErrorCode::io: return kIo;
      case ErrorCode::not_positive_definite:
      case ErrorCode::not_converged:
      case ErrorCode::dense_cap_exceeded: return kNumerical;
      default: return kUsage;
    }
  } catch (const std::filesystem::filesystem_error& e) {
    err << e.what() << '\n';
    return kIo;
  }
}

}  // namespace mqfb::cli
