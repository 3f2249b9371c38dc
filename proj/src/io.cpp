#include "mqfb/io.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "mqfb/error.hpp"

namespace mqfb::io {

namespace {

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode = {}) {
  std::ofstream out(path, std::ios::out | std::ios::trunc | mode);
  if (!out) throw Error(ErrorCode::io, "cannot open " + path.string() + " for writing");
  return out;
}

std::ifstream open_in(const std::filesystem::path& path, std::ios::openmode mode = {}) {
  std::ifstream in(path, std::ios::in | mode);
  if (!in) throw Error(ErrorCode::io, "cannot open " + path.string());
  return in;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

// Shortest text that parses back to the same double.
std::string format_double(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

double parse_double(std::string_view token, const std::string& where) {
  double v = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  if (!token.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    throw Error(ErrorCode::parse, where + ": bad number '" + std::string(token) + "'");
  }
  return v;
}

std::uint64_t to_little_endian(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    std::uint64_t r = 0;
    for (int i = 0; i < 8; ++i) r = (r << 8) | ((v >> (8 * i)) & 0xffu);
    return r;
  }
  return v;
}

}  // namespace

void write_matrix_market(std::ostream& out, const SparseSym& m) {
  std::size_t lower_count = 0;
  for (std::size_t r = 0; r < m.size(); ++r) {
    m.for_each_in_row(r, [&](std::size_t c, double) { lower_count += c <= r ? 1 : 0; });
  }
  out << "%%MatrixMarket matrix coordinate real symmetric\n";
  out << m.size() << ' ' << m.size() << ' ' << lower_count << '\n';
  // Column-major order of the lower triangle is the row-major order of the
  // upper one, which is what the symmetric CSR hands out row by row.
  for (std::size_t c = 0; c < m.size(); ++c) {
    m.for_each_in_row(c, [&](std::size_t r, double v) {
      if (r >= c) out << (r + 1) << ' ' << (c + 1) << ' ' << format_double(v) << '\n';
    });
  }
}

void write_matrix_market(const std::filesystem::path& path, const SparseSym& m) {
  auto out = open_out(path);
  write_matrix_market(out, m);
  if (!out) throw Error(ErrorCode::io, "write failed: " + path.string());
}

SparseSym read_matrix_market(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::parse, "empty Matrix Market stream");
  std::istringstream banner(line);
  std::string tag, object, format, field, symmetry;
  banner >> tag >> object >> format >> field >> symmetry;
  if (tag != "%%MatrixMarket" || lower(object) != "matrix" || lower(format) != "coordinate") {
    throw Error(ErrorCode::parse, "unsupported Matrix Market banner: " + line);
  }
  field = lower(field);
  symmetry = lower(symmetry);
  const bool pattern = field == "pattern";
  if (!pattern && field != "real" && field != "integer" && field != "double") {
    throw Error(ErrorCode::parse, "unsupported Matrix Market field: " + field);
  }
  if (symmetry != "symmetric" && symmetry != "general") {
    throw Error(ErrorCode::parse, "unsupported Matrix Market symmetry: " + symmetry);
  }

  do {
    if (!std::getline(in, line)) throw Error(ErrorCode::parse, "missing size line");
  } while (line.empty() || line[0] == '%');
  std::istringstream size_line(line);
  std::size_t rows = 0, cols = 0, entries = 0;
  if (!(size_line >> rows >> cols >> entries)) {
    throw Error(ErrorCode::parse, "bad size line: " + line);
  }
  if (rows != cols) throw Error(ErrorCode::parse, "matrix is not square");

  std::vector<Triplet> trips;
  trips.reserve(entries);
  std::size_t read = 0;
  while (read < entries && std::getline(in, line)) {
    if (line.empty() || line[0] == '%') continue;
    std::istringstream ls(line);
    std::size_t i = 0, j = 0;
    std::string value_text;
    if (!(ls >> i >> j)) throw Error(ErrorCode::parse, "bad entry line: " + line);
    double v = 1.0;
    if (!pattern) {
      if (!(ls >> value_text)) throw Error(ErrorCode::parse, "missing value: " + line);
      v = parse_double(value_text, "matrix market entry");
    }
    if (i == 0 || j == 0 || i > rows || j > cols) {
      throw Error(ErrorCode::parse, "entry index out of range: " + line);
    }
    if (symmetry == "symmetric" && j > i) {
      throw Error(ErrorCode::parse, "symmetric file stores an upper-triangle entry: " + line);
    }
    trips.push_back({i - 1, j - 1, v});
    ++read;
  }
  if (read != entries) throw Error(ErrorCode::parse, "truncated Matrix Market data");
  if (symmetry == "symmetric") return SparseSym::from_lower_triplets(rows, trips);
  return SparseSym::from_triplets(rows, trips);
}

SparseSym read_matrix_market(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_matrix_market(in);
}

void write_binary(const std::filesystem::path& path, const Eigen::MatrixXd& m) {
  auto out = open_out(path, std::ios::binary);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      const std::uint64_t bits = to_little_endian(std::bit_cast<std::uint64_t>(m(r, c)));
      out.write(reinterpret_cast<const char*>(&bits), sizeof(bits));
    }
  }
  if (!out) throw Error(ErrorCode::io, "write failed: " + path.string());
}

Eigen::MatrixXd read_binary(const std::filesystem::path& path, Eigen::Index rows,
                            Eigen::Index cols) {
  auto in = open_in(path, std::ios::binary);
  const auto expected = static_cast<std::uintmax_t>(rows * cols) * 8u;
  if (std::filesystem::file_size(path) != expected) {
    throw Error(ErrorCode::parse, path.string() + ": expected " + std::to_string(expected) +
                                      " bytes for a " + std::to_string(rows) + "x" +
                                      std::to_string(cols) + " block");
  }
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      std::uint64_t bits = 0;
      in.read(reinterpret_cast<char*>(&bits), sizeof(bits));
      m(r, c) = std::bit_cast<double>(to_little_endian(bits));
    }
  }
  if (!in) throw Error(ErrorCode::io, "read failed: " + path.string());
  return m;
}

Eigen::VectorXd read_binary_vector(const std::filesystem::path& path) {
  const auto bytes = std::filesystem::file_size(path);
  if (bytes % 8 != 0) throw Error(ErrorCode::parse, path.string() + ": size not a multiple of 8");
  return read_binary(path, static_cast<Eigen::Index>(bytes / 8), 1).col(0);
}

void write_csv(const std::filesystem::path& path, const Eigen::MatrixXd& m) {
  auto out = open_out(path);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) out << ',';
      out << format_double(m(r, c));
    }
    out << '\n';
  }
  if (!out) throw Error(ErrorCode::io, "write failed: " + path.string());
}

Eigen::MatrixXd read_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      auto token = std::string_view(line).substr(start, comma == std::string::npos
                                                            ? std::string::npos
                                                            : comma - start);
      while (!token.empty() && std::isspace(static_cast<unsigned char>(token.front()))) {
        token.remove_prefix(1);
      }
      while (!token.empty() && std::isspace(static_cast<unsigned char>(token.back()))) {
        token.remove_suffix(1);
      }
      row.push_back(parse_double(token, path.string()));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw Error(ErrorCode::parse, path.string() + ": ragged CSV rows");
    }
    rows.push_back(std::move(row));
  }
  const auto ncols = rows.empty() ? 0 : rows.front().size();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(ncols));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < ncols; ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
  }
  return m;
}

void write_partition(const std::filesystem::path& path, const Partition& p) {
  auto out = open_out(path);
  for (auto f : p.indicator()) out << (f > 0 ? "1" : "-1") << '\n';
  if (!out) throw Error(ErrorCode::io, "write failed: " + path.string());
}

Partition read_partition(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::vector<std::int8_t> f;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line == "1" || line == "+1") {
      f.push_back(1);
    } else if (line == "-1") {
      f.push_back(-1);
    } else {
      throw Error(ErrorCode::parse, path.string() + ": bad partition entry '" + line + "'");
    }
  }
  return Partition(std::move(f));
}

}  // namespace mqfb::io
