#include "mqfb/multires.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "mqfb/error.hpp"
#include "mqfb/io.hpp"
#include "mqfb/rng.hpp"

namespace mqfb {

namespace {

// Degrees used by the zero-DC scaling; isolated vertices (bipartite arm only)
// count as degree one, matching their unit diagonal in the operator.
Eigen::VectorXd dc_degrees(const Graph& g) {
  Eigen::VectorXd d = g.degrees();
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    if (d(i) <= 0.0) d(i) = 1.0;
  }
  return d;
}

Eigen::VectorXd sqrt_degrees_on_a(const Graph& g, const Partition& p) {
  const Eigen::VectorXd d = dc_degrees(g);
  Eigen::VectorXd out(static_cast<Eigen::Index>(p.set_a().size()));
  for (std::size_t k = 0; k < p.set_a().size(); ++k) {
    out(static_cast<Eigen::Index>(k)) = std::sqrt(d(static_cast<Eigen::Index>(p.set_a()[k])));
  }
  return out;
}

SparseSym operator_for(const Graph& g, OperatorKind op, Baseline baseline) {
  if (baseline == Baseline::bipartite) {
    return normalized_laplacian(g, IsolatedVertexPolicy::unit_diagonal);
  }
  return op == OperatorKind::combinatorial ? combinatorial_laplacian(g) : normalized_laplacian(g);
}

std::shared_ptr<const FilterBankContext> context_for(const DecompositionTree& tree,
                                                     std::size_t level,
                                                     const ContextOptions& options,
                                                     StageTimes* times) {
  if (level < tree.contexts.size() && tree.contexts[level]) return tree.contexts[level];
  SparseSym m;
  {
    ScopedTimer timer(times ? &times->laplacian : nullptr);
    m = level_operator(tree, level);
  }
  ContextOptions opts = options;
  opts.mode = tree.spec.mode;
  return std::make_shared<const FilterBankContext>(std::move(m), tree.levels[level].partition, opts,
                                                   times);
}

Eigen::MatrixXd reconstruct_from(const DecompositionTree& tree, std::size_t zeroed_levels,
                                 const ContextOptions& options, StageTimes* times) {
  if (tree.levels.size() != tree.meta.levels_realized) {
    throw Error(ErrorCode::missing_level, "tree has " + std::to_string(tree.levels.size()) +
                                              " levels, meta records " +
                                              std::to_string(tree.meta.levels_realized));
  }
  if (static_cast<std::size_t>(tree.root.rows()) != tree.points_at(tree.levels.size())) {
    throw Error(ErrorCode::missing_level, "root approximation has the wrong size");
  }
  Eigen::MatrixXd x = tree.root;
  for (std::size_t l = tree.levels.size(); l-- > 0;) {
    const auto& rec = tree.levels[l];
    if (static_cast<std::size_t>(rec.detail.rows()) != rec.partition.set_b().size() ||
        rec.detail.cols() != x.cols()) {
      throw Error(ErrorCode::missing_level, "level " + std::to_string(l) + " detail is missing");
    }
    ChannelCoefficients c;
    c.d = l < zeroed_levels ? Eigen::MatrixXd::Zero(rec.detail.rows(), rec.detail.cols())
                            : rec.detail;
    try {
      const auto ctx = context_for(tree, l, options, times);
      if (tree.meta.zero_dc) {
        c.a = sqrt_degrees_on_a(rec.graph, rec.partition).asDiagonal() * x;
        x = synthesize(zero_dc_wrap(tree.spec, dc_degrees(rec.graph)), *ctx, c, times);
      } else {
        c.a = std::move(x);
        x = synthesize(tree.spec, *ctx, c, times);
      }
    } catch (const Error& e) {
      throw Error(e.code(), "level " + std::to_string(l) + ": " + e.detail());
    }
  }
  return x;
}

std::string format_double(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string level_dir_name(std::size_t l) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "level_%02zu", l);
  return buf;
}

}  // namespace

std::string to_string(OperatorKind kind) {
  return kind == OperatorKind::combinatorial ? "comb" : "norm";
}

std::string to_string(Baseline baseline) {
  return baseline == Baseline::none ? "none" : "bipartite";
}

OperatorKind operator_kind_from_string(const std::string& s) {
  if (s == "comb" || s == "combinatorial") return OperatorKind::combinatorial;
  if (s == "norm" || s == "normalized") return OperatorKind::normalized;
  throw Error(ErrorCode::invalid_argument, "unknown operator '" + s + "'");
}

Baseline baseline_from_string(const std::string& s) {
  if (s == "none") return Baseline::none;
  if (s == "bipartite") return Baseline::bipartite;
  throw Error(ErrorCode::invalid_argument, "unknown baseline '" + s + "'");
}

std::size_t min_level_points(std::size_t k) { return std::max<std::size_t>(4, k + 1); }

nlohmann::json TreeMeta::to_json() const {
  return {{"n", n},
          {"channels", channels},
          {"k", k},
          {"levels_requested", levels_requested},
          {"levels_realized", levels_realized},
          {"stopped_early", stopped_early},
          {"min_level_points", min_level_points},
          {"seed", seed},
          {"operator", to_string(op)},
          {"baseline", to_string(baseline)},
          {"zero_dc", zero_dc},
          {"attribute_names", attribute_names}};
}

TreeMeta TreeMeta::from_json(const nlohmann::json& j) {
  try {
    TreeMeta m;
    m.n = j.at("n").get<std::size_t>();
    m.channels = j.at("channels").get<std::size_t>();
    m.k = j.at("k").get<std::size_t>();
    m.levels_requested = j.at("levels_requested").get<std::size_t>();
    m.levels_realized = j.at("levels_realized").get<std::size_t>();
    m.stopped_early = j.at("stopped_early").get<bool>();
    m.min_level_points = j.at("min_level_points").get<std::size_t>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.op = operator_kind_from_string(j.at("operator").get<std::string>());
    m.baseline = baseline_from_string(j.at("baseline").get<std::string>());
    m.zero_dc = j.at("zero_dc").get<bool>();
    m.attribute_names = j.at("attribute_names").get<std::vector<std::string>>();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::parse, std::string("tree meta: ") + e.what());
  }
}

std::size_t DecompositionTree::coefficient_count() const {
  std::size_t count = static_cast<std::size_t>(root.rows() * root.cols());
  for (const auto& l : levels) count += static_cast<std::size_t>(l.detail.rows() * l.detail.cols());
  return count;
}

std::size_t DecompositionTree::points_at(std::size_t level) const {
  if (level == 0) return meta.n;
  return levels.at(level - 1).partition.set_a().size();
}

SparseSym level_operator(const DecompositionTree& tree, std::size_t level) {
  if (level >= tree.levels.size()) {
    throw Error(ErrorCode::missing_level, "no level " + std::to_string(level));
  }
  return operator_for(tree.levels[level].graph, tree.meta.op, tree.meta.baseline);
}

DecompositionTree decompose(const PointCloud& cloud, const FilterBankSpec& spec,
                            const DecomposeOptions& options, StageTimes* times) {
  cloud.validate();
  spec.validate();
  const std::size_t n = cloud.size();
  if (cloud.channels() == 0) throw Error(ErrorCode::invalid_argument, "cloud has no attributes");
  if (options.levels < 1) throw Error(ErrorCode::invalid_argument, "need at least one level");
  if (options.levels >= 63 || (n >> options.levels) < 1) {
    throw Error(ErrorCode::invalid_argument, std::to_string(options.levels) +
                                                 " levels need at least 2^L points, cloud has " +
                                                 std::to_string(n));
  }
  if (options.k < 1) throw Error(ErrorCode::invalid_argument, "k must be positive");
  if (options.zero_dc && options.baseline == Baseline::none &&
      options.op != OperatorKind::normalized) {
    throw Error(ErrorCode::invalid_argument,
                "zero-DC scaling needs the normalized operator (the combinatorial Laplacian "
                "already maps constants to zero)");
  }

  DecompositionTree tree;
  tree.spec = spec;
  tree.meta.n = n;
  tree.meta.channels = cloud.channels();
  tree.meta.k = options.k;
  tree.meta.levels_requested = options.levels;
  tree.meta.min_level_points = min_level_points(options.k);
  tree.meta.seed = options.seed;
  tree.meta.op = options.op;
  tree.meta.baseline = options.baseline;
  tree.meta.zero_dc = options.zero_dc;
  tree.meta.attribute_names = cloud.attribute_names;

  ContextOptions ctx_opts{spec.mode, options.solver, options.eigen};
  const SeedStream stream(options.seed);
  Eigen::MatrixX3d pos = cloud.positions;
  Eigen::MatrixXd x = cloud.attributes;

  for (std::size_t l = 0; l < options.levels; ++l) {
    if (static_cast<std::size_t>(pos.rows()) < tree.meta.min_level_points) {
      tree.meta.stopped_early = true;
      break;
    }
    const SeedStream level_stream = stream.split(l);
    Graph g;
    {
      ScopedTimer timer(times ? &times->knn : nullptr);
      g = knn_graph(pos, options.k, options.knn);
    }
    Partition p = [&] {
      ScopedTimer timer(times ? &times->partition : nullptr);
      const Partition drawn = random_partition(g.size(), level_stream.split(0).seed());
      if (options.baseline == Baseline::bipartite) return drawn;
      return mix_components(drawn, connected_components(g), level_stream.split(1).seed());
    }();
    SparseSym m;
    std::shared_ptr<const FilterBankContext> ctx;
    ChannelCoefficients c;
    try {
      {
        ScopedTimer timer(times ? &times->laplacian : nullptr);
        if (options.baseline == Baseline::bipartite) g = bipartize(g, p);
        m = operator_for(g, options.op, options.baseline);
      }
      ctx = std::make_shared<const FilterBankContext>(std::move(m), p, ctx_opts, times);

      if (options.zero_dc) {
        c = analyze(zero_dc_wrap(spec, dc_degrees(g)), *ctx, x, times);
        x = sqrt_degrees_on_a(g, p).cwiseInverse().asDiagonal() * c.a;
      } else {
        c = analyze(spec, *ctx, x, times);
        x = std::move(c.a);
      }
    } catch (const Error& e) {
      throw Error(e.code(), "level " + std::to_string(l) + ": " + e.detail());
    }
    Eigen::MatrixX3d next(static_cast<Eigen::Index>(p.set_a().size()), 3);
    for (std::size_t k = 0; k < p.set_a().size(); ++k) {
      next.row(static_cast<Eigen::Index>(k)) = pos.row(static_cast<Eigen::Index>(p.set_a()[k]));
    }
    pos = std::move(next);
    tree.levels.push_back({std::move(p), std::move(g), std::move(c.d)});
    tree.contexts.push_back(std::move(ctx));
  }
  tree.meta.levels_realized = tree.levels.size();
  tree.root = std::move(x);
  return tree;
}

Eigen::MatrixXd reconstruct(const DecompositionTree& tree, const ContextOptions& options,
                            StageTimes* times) {
  return reconstruct_from(tree, 0, options, times);
}

ApproximationResult linear_approximation(const DecompositionTree& tree, std::size_t zeroed_levels,
                                         const Eigen::MatrixXd& reference,
                                         const ContextOptions& options) {
  if (zeroed_levels > tree.levels.size()) {
    throw Error(ErrorCode::invalid_argument, "cannot zero " + std::to_string(zeroed_levels) +
                                                 " of " + std::to_string(tree.levels.size()) +
                                                 " levels");
  }
  ApproximationResult r;
  r.zeroed_levels = zeroed_levels;
  r.keep_nominal = std::ldexp(1.0, -static_cast<int>(zeroed_levels));
  r.m_over_n = static_cast<double>(tree.points_at(zeroed_levels)) / static_cast<double>(tree.meta.n);
  r.attributes = reconstruct_from(tree, zeroed_levels, options, nullptr);
  r.psnr = psnr(r.attributes, reference);
  return r;
}

std::vector<ApproximationResult> approximation_sweep(const DecompositionTree& tree,
                                                     const Eigen::MatrixXd& reference,
                                                     const ContextOptions& options) {
  std::vector<ApproximationResult> out;
  for (std::size_t z = 0; z <= tree.levels.size(); ++z) {
    out.push_back(linear_approximation(tree, z, reference, options));
  }
  return out;
}

std::vector<double> psnr(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, double peak) {
  if (x.rows() != y.rows() || x.cols() != y.cols()) {
    throw Error(ErrorCode::dimension_mismatch, "PSNR inputs differ in shape");
  }
  if (x.rows() == 0) throw Error(ErrorCode::invalid_argument, "PSNR of an empty signal");
  std::vector<double> out;
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    const double mse = (x.col(c) - y.col(c)).squaredNorm() / static_cast<double>(x.rows());
    out.push_back(mse == 0.0 ? kPsnrCap
                             : std::min(kPsnrCap, 10.0 * std::log10(peak * peak / mse)));
  }
  return out;
}

void save_tree(const std::filesystem::path& dir, const DecompositionTree& tree) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::io, "cannot create " + dir.string() + ": " + ec.message());
  nlohmann::json meta = tree.meta.to_json();
  meta["spec"] = spec_to_json(tree.spec);
  meta["root_rows"] = tree.root.rows();
  {
    std::ofstream out(dir / "meta.json");
    if (!out) throw Error(ErrorCode::io, "cannot write " + (dir / "meta.json").string());
    out << meta.dump(2) << '\n';
  }
  io::write_binary(dir / "root.bin", tree.root);
  for (std::size_t l = 0; l < tree.levels.size(); ++l) {
    const auto ld = dir / level_dir_name(l);
    std::filesystem::create_directories(ld, ec);
    if (ec) throw Error(ErrorCode::io, "cannot create " + ld.string() + ": " + ec.message());
    io::write_partition(ld / "partition.txt", tree.levels[l].partition);
    io::write_matrix_market(ld / "graph.mtx", tree.levels[l].graph.adjacency());
    io::write_binary(ld / "detail.bin", tree.levels[l].detail);
  }
}

DecompositionTree load_tree(const std::filesystem::path& dir) {
  std::ifstream in(dir / "meta.json");
  if (!in) throw Error(ErrorCode::io, "cannot read " + (dir / "meta.json").string());
  nlohmann::json meta;
  try {
    in >> meta;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::parse, std::string("meta.json: ") + e.what());
  }
  DecompositionTree tree;
  tree.meta = TreeMeta::from_json(meta);
  tree.spec = spec_from_json(meta.at("spec"));
  const auto c = static_cast<Eigen::Index>(tree.meta.channels);
  for (std::size_t l = 0; l < tree.meta.levels_realized; ++l) {
    const auto ld = dir / level_dir_name(l);
    if (!std::filesystem::exists(ld)) {
      throw Error(ErrorCode::missing_level, ld.string() + " does not exist");
    }
    LevelRecord rec{io::read_partition(ld / "partition.txt"),
                    Graph(io::read_matrix_market(ld / "graph.mtx")), {}};
    const std::size_t expected = tree.points_at(l);
    if (rec.partition.size() != expected || rec.graph.size() != expected) {
      throw Error(ErrorCode::dimension_mismatch, "level " + std::to_string(l) + " has " +
                                                     std::to_string(rec.partition.size()) +
                                                     " points, expected " +
                                                     std::to_string(expected));
    }
    rec.detail = io::read_binary(ld / "detail.bin",
                                 static_cast<Eigen::Index>(rec.partition.set_b().size()), c);
    tree.levels.push_back(std::move(rec));
  }
  tree.root = io::read_binary(dir / "root.bin",
                              static_cast<Eigen::Index>(tree.points_at(tree.levels.size())), c);
  return tree;
}

void append_approximation_csv(const std::filesystem::path& path, const std::vector<CsvRow>& rows) {
  std::error_code ec;
  const bool fresh = !std::filesystem::exists(path) || std::filesystem::file_size(path, ec) == 0;
  std::ofstream out(path, std::ios::app);
  if (!out) throw Error(ErrorCode::io, "cannot append to " + path.string());
  if (fresh) out << "frame,K,L,family,m_over_n,psnr_r,psnr_g,psnr_b,seconds\n";
  for (const auto& r : rows) {
    out << r.frame << ',' << r.k << ',' << r.levels << ',' << r.family << ','
        << format_double(r.m_over_n);
    for (std::size_t c = 0; c < 3; ++c) {
      out << ',';
      if (c < r.psnr.size()) out << format_double(r.psnr[c]);
    }
    out << ',' << format_double(r.seconds) << '\n';
  }
}

}  // namespace mqfb
