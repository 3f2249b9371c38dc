#include <doctest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "helpers.hpp"
#include "mqfb/error.hpp"
#include "mqfb/io.hpp"
#include "mqfb/synthetic.hpp"

using namespace mqfb;

TEST_SUITE("io") {

TEST_CASE("Matrix Market round trip is exact") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> w(0.0, 1.0);
  std::vector<Edge> edges;
  for (std::size_t i = 1; i < 30; ++i) edges.push_back({i - 1, i, w(rng) / 3.0});
  edges.push_back({0, 29, 1e-300});
  const auto l = combinatorial_laplacian(Graph::from_edges(30, edges));
  std::stringstream ss;
  io::write_matrix_market(ss, l);
  CHECK(io::read_matrix_market(ss) == l);
}

TEST_CASE("Matrix Market general and pattern layouts") {
  std::istringstream general(
      "%%MatrixMarket matrix coordinate real general\n% comment\n2 2 3\n1 1 2.5\n1 2 -1\n2 1 -1\n");
  const auto g = io::read_matrix_market(general);
  CHECK(g.coeff(0, 0) == 2.5);
  CHECK(g.coeff(1, 0) == -1.0);

  std::istringstream pattern("%%MatrixMarket matrix coordinate pattern symmetric\n3 3 2\n2 1\n3 2\n");
  const auto p = io::read_matrix_market(pattern);
  CHECK(p.coeff(0, 1) == 1.0);
  CHECK(p.coeff(2, 1) == 1.0);
  CHECK(p.nonzeros() == 4);

  std::istringstream asym("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 2 1\n2 1 3\n");
  CHECK_THROWS_AS(io::read_matrix_market(asym), Error);
  std::istringstream upper("%%MatrixMarket matrix coordinate real symmetric\n2 2 1\n1 2 1\n");
  CHECK_THROWS_AS(io::read_matrix_market(upper), Error);
  std::istringstream junk("hello\n");
  CHECK_THROWS_AS(io::read_matrix_market(junk), Error);
}

TEST_CASE("binary, CSV and partition files") {
  const auto dir = test::temp_dir("io");
  std::mt19937_64 rng(8);
  const Eigen::MatrixXd m = test::random_matrix(rng, 7, 3);
  io::write_binary(dir / "m.bin", m);
  CHECK(io::read_binary(dir / "m.bin", 7, 3) == m);
  CHECK_THROWS_AS(io::read_binary(dir / "m.bin", 7, 4), Error);
  CHECK(std::filesystem::file_size(dir / "m.bin") == 7 * 3 * 8);

  io::write_csv(dir / "m.csv", m);
  CHECK(io::read_csv(dir / "m.csv") == m);

  const auto p = random_partition(50, 3);
  io::write_partition(dir / "p.txt", p);
  CHECK(io::read_partition(dir / "p.txt") == p);

  std::ofstream(dir / "bad.txt") << "1\n0\n-1\n";
  CHECK_THROWS_AS(io::read_partition(dir / "bad.txt"), Error);
  CHECK_THROWS_AS(io::read_binary(dir / "missing.bin", 1, 1), Error);
}

}
