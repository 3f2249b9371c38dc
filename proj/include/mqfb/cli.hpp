#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace mqfb::cli {

enum ExitCode : int {
  kOk = 0,
  kCheckFailed = 1,  // an invariant did not hold
  kUsage = 2,        // bad arguments or invalid input data
  kIo = 3,
  kNumerical = 4,    // solver / factorization failure
};

struct RunConfig {
  std::string command;
  std::vector<std::string> inputs;
  std::size_t k = 5;
  std::size_t levels = 7;
  std::uint64_t seed = 0;
  std::string family = "lazy";
  std::string spec_file;
  std::string op = "comb";
  std::string mode;  // empty: the family default
  std::string baseline = "none";
  std::optional<double> tol;
  std::string out;
  std::string solver = "direct";

  // verify
  std::size_t graphs = 100;
  std::string generator = "er";  // er | knn | bipartite
  std::size_t n_min = 10;
  std::size_t n_max = 200;
  double p = 0.1;
  std::size_t knn_k = 4;
  bool identity_q = false;  // deliberate misuse: Q = I instead of the block diagonal
  std::size_t trials = 5;
  std::string partition_file;

  // decompose / bench
  std::size_t synthetic = 0;  // points in a generated cloud; 0 reads --input
  std::vector<std::string> attributes;
  std::vector<std::size_t> bfb_k{10, 20};
  std::vector<std::size_t> sizes;
  std::size_t frames = 1;
  std::string cloud;  // reconstruct: original cloud for positions and PSNR

  nlohmann::json to_json() const;
};

int cmd_verify(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_decompose(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_reconstruct(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_bench(const RunConfig& config, std::ostream& out, std::ostream& err);

// Parses arguments and dispatches; library errors become exit codes.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace mqfb::cli
