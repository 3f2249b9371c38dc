#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "mqfb/filterbank.hpp"
#include "mqfb/graph.hpp"
#include "mqfb/partition.hpp"
#include "mqfb/point_cloud.hpp"
#include "mqfb/timing.hpp"

namespace mqfb {

enum class OperatorKind { combinatorial, normalized };
enum class Baseline { none, bipartite };

std::string to_string(OperatorKind kind);
std::string to_string(Baseline baseline);
OperatorKind operator_kind_from_string(const std::string& s);
Baseline baseline_from_string(const std::string& s);

struct DecomposeOptions {
  std::size_t k = 5;
  std::size_t levels = 7;
  std::uint64_t seed = 0;
  OperatorKind op = OperatorKind::combinatorial;
  // Bipartite: each level keeps only the A-B edges of its KNN graph and runs
  // on their normalized Laplacian, so Q = I. `op` is ignored.
  Baseline baseline = Baseline::none;
  // D^{1/2} conjugation per level; requires the normalized operator.
  bool zero_dc = false;
  SolverOptions solver;
  EigenOptions eigen;
  KnnOptions knn;
};

// A level with fewer points than this is not split.
std::size_t min_level_points(std::size_t k);

struct LevelRecord {
  Partition partition;
  Graph graph;             // graph the filter bank ran on
  Eigen::MatrixXd detail;  // |B| x channels
};

struct TreeMeta {
  std::size_t n = 0;
  std::size_t channels = 0;
  std::size_t k = 0;
  std::size_t levels_requested = 0;
  std::size_t levels_realized = 0;
  bool stopped_early = false;
  std::size_t min_level_points = 0;
  std::uint64_t seed = 0;
  OperatorKind op = OperatorKind::combinatorial;
  Baseline baseline = Baseline::none;
  bool zero_dc = false;
  std::vector<std::string> attribute_names;

  nlohmann::json to_json() const;
  static TreeMeta from_json(const nlohmann::json& j);
};

struct DecompositionTree {
  TreeMeta meta;
  FilterBankSpec spec;
  std::vector<LevelRecord> levels;  // finest first
  Eigen::MatrixXd root;             // approximation left after the last level

  // Filter-bank contexts built during decompose, reused by reconstruct.
  // Not serialized; rebuilt from the stored graphs when absent.
  std::vector<std::shared_ptr<const FilterBankContext>> contexts;

  std::size_t coefficient_count() const;
  // Points entering level `level` (level == levels.size() gives the root).
  std::size_t points_at(std::size_t level) const;
};

DecompositionTree decompose(const PointCloud& cloud, const FilterBankSpec& spec,
                            const DecomposeOptions& options, StageTimes* times = nullptr);

// Synthesizes from the root upward. The solver options used for rebuilt
// contexts come from `options`.
Eigen::MatrixXd reconstruct(const DecompositionTree& tree, const ContextOptions& options = {},
                            StageTimes* times = nullptr);

// Variation operator a level runs on, rebuilt from its stored graph.
SparseSym level_operator(const DecompositionTree& tree, std::size_t level);

struct ApproximationResult {
  std::size_t zeroed_levels = 0;
  double keep_nominal = 1.0;  // 2^-zeroed_levels
  double m_over_n = 1.0;      // realized low-pass count over n
  Eigen::MatrixXd attributes;
  std::vector<double> psnr;   // per channel
};

// Reconstruction with the details of the `zeroed_levels` finest levels set
// to zero.
ApproximationResult linear_approximation(const DecompositionTree& tree, std::size_t zeroed_levels,
                                         const Eigen::MatrixXd& reference,
                                         const ContextOptions& options = {});
// zeroed_levels = 0 .. levels_realized.
std::vector<ApproximationResult> approximation_sweep(const DecompositionTree& tree,
                                                     const Eigen::MatrixXd& reference,
                                                     const ContextOptions& options = {});

inline constexpr double kPsnrCap = 999.0;

// 10 log10(peak^2 / MSE) per column; kPsnrCap when the MSE is zero.
std::vector<double> psnr(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, double peak = 255.0);

// Directory layout: meta.json, root.bin, level_XX/{partition.txt, graph.mtx, detail.bin}.
void save_tree(const std::filesystem::path& dir, const DecompositionTree& tree);
DecompositionTree load_tree(const std::filesystem::path& dir);

struct CsvRow {
  std::string frame;
  std::size_t k = 0;
  std::size_t levels = 0;
  std::string family;
  double m_over_n = 0.0;
  std::vector<double> psnr;
  double seconds = 0.0;
};

// Appends rows, writing the header when the file is new or empty.
void append_approximation_csv(const std::filesystem::path& path, const std::vector<CsvRow>& rows);

}  // namespace mqfb
