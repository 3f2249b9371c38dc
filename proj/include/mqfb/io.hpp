#pragma once

#include <filesystem>
#include <iosfwd>

#include <Eigen/Dense>

#include "mqfb/partition.hpp"
#include "mqfb/sparse.hpp"

namespace mqfb::io {

// Matrix Market coordinate files. Writing always emits the `real symmetric`
// lower triangle with round-trip precision; reading accepts real, integer,
// or pattern data in symmetric or (symmetric-valued) general layout.
void write_matrix_market(std::ostream& out, const SparseSym& m);
void write_matrix_market(const std::filesystem::path& path, const SparseSym& m);
SparseSym read_matrix_market(std::istream& in);
SparseSym read_matrix_market(const std::filesystem::path& path);

// Raw little-endian float64. Matrices are written row-major; the shape is
// carried out of band.
void write_binary(const std::filesystem::path& path, const Eigen::MatrixXd& m);
Eigen::MatrixXd read_binary(const std::filesystem::path& path, Eigen::Index rows,
                            Eigen::Index cols);
Eigen::VectorXd read_binary_vector(const std::filesystem::path& path);

// Comma-separated rows, one matrix row per line, round-trip precision.
void write_csv(const std::filesystem::path& path, const Eigen::MatrixXd& m);
Eigen::MatrixXd read_csv(const std::filesystem::path& path);

// One +1 or -1 per line.
void write_partition(const std::filesystem::path& path, const Partition& p);
Partition read_partition(const std::filesystem::path& path);

}  // namespace mqfb::io
