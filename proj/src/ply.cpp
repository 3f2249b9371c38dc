#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>

#include "mqfb/error.hpp"
#include "mqfb/point_cloud.hpp"

namespace mqfb {

namespace {

struct PropertyDef {
  std::string name;
  PlyType type = PlyType::float32;
  bool is_list = false;
  PlyType count_type = PlyType::uint8;
};

struct ElementDef {
  std::string name;
  std::size_t count = 0;
  std::vector<PropertyDef> properties;
};

std::optional<PlyType> parse_type(const std::string& t) {
  if (t == "char" || t == "int8") return PlyType::int8;
  if (t == "uchar" || t == "uint8") return PlyType::uint8;
  if (t == "short" || t == "int16") return PlyType::int16;
  if (t == "ushort" || t == "uint16") return PlyType::uint16;
  if (t == "int" || t == "int32") return PlyType::int32;
  if (t == "uint" || t == "uint32") return PlyType::uint32;
  if (t == "float" || t == "float32") return PlyType::float32;
  if (t == "double" || t == "float64") return PlyType::float64;
  return std::nullopt;
}

const char* type_name(PlyType t) {
  switch (t) {
    case PlyType::int8: return "char";
    case PlyType::uint8: return "uchar";
    case PlyType::int16: return "short";
    case PlyType::uint16: return "ushort";
    case PlyType::int32: return "int";
    case PlyType::uint32: return "uint";
    case PlyType::float32: return "float";
    case PlyType::float64: return "double";
  }
  return "double";
}

std::size_t type_size(PlyType t) {
  switch (t) {
    case PlyType::int8:
    case PlyType::uint8: return 1;
    case PlyType::int16:
    case PlyType::uint16: return 2;
    case PlyType::int32:
    case PlyType::uint32:
    case PlyType::float32: return 4;
    case PlyType::float64: return 8;
  }
  return 8;
}

template <typename T>
T byteswap_value(T v) {
  std::array<unsigned char, sizeof(T)> bytes;
  std::memcpy(bytes.data(), &v, sizeof(T));
  std::reverse(bytes.begin(), bytes.end());
  std::memcpy(&v, bytes.data(), sizeof(T));
  return v;
}

class BinaryReader {
 public:
  BinaryReader(std::istream& in, bool file_little_endian)
      : in_(in), swap_((std::endian::native == std::endian::little) != file_little_endian) {}

  double read(PlyType t) {
    switch (t) {
      case PlyType::int8: return get<std::int8_t>();
      case PlyType::uint8: return get<std::uint8_t>();
      case PlyType::int16: return get<std::int16_t>();
      case PlyType::uint16: return get<std::uint16_t>();
      case PlyType::int32: return get<std::int32_t>();
      case PlyType::uint32: return get<std::uint32_t>();
      case PlyType::float32: return get<float>();
      case PlyType::float64: return get<double>();
    }
    return 0.0;
  }

  void skip(std::size_t bytes) { in_.ignore(static_cast<std::streamsize>(bytes)); }

 private:
  template <typename T>
  T get() {
    T v{};
    in_.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in_) throw Error(ErrorCode::parse, "PLY binary payload truncated");
    return swap_ ? byteswap_value(v) : v;
  }

  std::istream& in_;
  bool swap_;
};

// Reconstructed attributes are real valued; integer channels are rounded
// and saturated.
template <typename T>
T to_integer(double v) {
  const double lo = static_cast<double>(std::numeric_limits<T>::min());
  const double hi = static_cast<double>(std::numeric_limits<T>::max());
  return static_cast<T>(std::clamp(std::round(v), lo, hi));
}

class BinaryWriter {
 public:
  BinaryWriter(std::ostream& out, bool little_endian)
      : out_(out), swap_((std::endian::native == std::endian::little) != little_endian) {}

  void write(PlyType t, double v) {
    switch (t) {
      case PlyType::int8: return put(to_integer<std::int8_t>(v));
      case PlyType::uint8: return put(to_integer<std::uint8_t>(v));
      case PlyType::int16: return put(to_integer<std::int16_t>(v));
      case PlyType::uint16: return put(to_integer<std::uint16_t>(v));
      case PlyType::int32: return put(to_integer<std::int32_t>(v));
      case PlyType::uint32: return put(to_integer<std::uint32_t>(v));
      case PlyType::float32: return put(static_cast<float>(v));
      case PlyType::float64: return put(v);
    }
  }

 private:
  template <typename T>
  void put(T v) {
    if (swap_) v = byteswap_value(v);
    out_.write(reinterpret_cast<const char*>(&v), sizeof(T));
  }

  std::ostream& out_;
  bool swap_;
};

// Integer types are written as integers; floats with round-trip precision.
std::string format_value(PlyType t, double v) {
  char buf[32];
  if (t == PlyType::float32) {
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), static_cast<float>(v));
    return std::string(buf, end);
  }
  if (t == PlyType::float64) {
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, end);
  }
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), to_integer<std::int64_t>(v));
  return std::string(buf, end);
}

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

}  // namespace

void PointCloud::validate() const {
  if (positions.rows() < 2) throw Error(ErrorCode::invalid_argument, "point cloud needs n >= 2");
  if (!positions.allFinite()) {
    throw Error(ErrorCode::invalid_argument, "point cloud has NaN or Inf coordinates");
  }
  if (attributes.cols() > 0 && attributes.rows() != positions.rows()) {
    throw Error(ErrorCode::dimension_mismatch, "attribute rows differ from point count");
  }
  if (attribute_names.size() != static_cast<std::size_t>(attributes.cols()) ||
      attribute_types.size() != static_cast<std::size_t>(attributes.cols())) {
    throw Error(ErrorCode::invalid_argument, "attribute names/types do not match channels");
  }
}

PointCloud PointCloud::subset(const std::vector<std::size_t>& rows) const {
  PointCloud out;
  out.positions.resize(static_cast<Eigen::Index>(rows.size()), 3);
  out.attributes.resize(static_cast<Eigen::Index>(rows.size()), attributes.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto r = static_cast<Eigen::Index>(rows[k]);
    out.positions.row(static_cast<Eigen::Index>(k)) = positions.row(r);
    if (attributes.cols() > 0) {
      out.attributes.row(static_cast<Eigen::Index>(k)) = attributes.row(r);
    }
  }
  out.attribute_names = attribute_names;
  out.position_type = position_type;
  out.attribute_types = attribute_types;
  return out;
}

PointCloud load_ply(const std::filesystem::path& path,
                    const std::vector<std::string>& attribute_names) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open " + path.string());

  std::string line;
  std::getline(in, line);
  if (strip_cr(line) != "ply") throw Error(ErrorCode::parse, path.string() + ": not a PLY file");

  std::optional<PlyFormat> format;
  std::vector<ElementDef> elements;
  bool header_done = false;
  while (std::getline(in, line)) {
    line = strip_cr(line);
    std::istringstream ls(line);
    std::string keyword;
    ls >> keyword;
    if (keyword.empty() || keyword == "comment" || keyword == "obj_info") continue;
    if (keyword == "format") {
      std::string f, version;
      ls >> f >> version;
      if (f == "ascii") format = PlyFormat::ascii;
      else if (f == "binary_little_endian") format = PlyFormat::binary_little_endian;
      else if (f == "binary_big_endian") format = PlyFormat::binary_big_endian;
      else throw Error(ErrorCode::parse, "unknown PLY format '" + f + "'");
    } else if (keyword == "element") {
      ElementDef e;
      long long count = -1;
      ls >> e.name >> count;
      if (e.name.empty() || count < 0) throw Error(ErrorCode::parse, "malformed element: " + line);
      e.count = static_cast<std::size_t>(count);
      elements.push_back(std::move(e));
    } else if (keyword == "property") {
      if (elements.empty()) throw Error(ErrorCode::parse, "property before any element");
      PropertyDef prop;
      std::string t;
      ls >> t;
      if (t == "list") {
        std::string count_t, item_t;
        ls >> count_t >> item_t >> prop.name;
        auto ct = parse_type(count_t);
        auto it = parse_type(item_t);
        if (!ct || !it || prop.name.empty()) {
          throw Error(ErrorCode::parse, "malformed list property: " + line);
        }
        prop.is_list = true;
        prop.count_type = *ct;
        prop.type = *it;
      } else {
        auto pt = parse_type(t);
        ls >> prop.name;
        if (!pt || prop.name.empty()) throw Error(ErrorCode::parse, "malformed property: " + line);
        prop.type = *pt;
      }
      elements.back().properties.push_back(std::move(prop));
    } else if (keyword == "end_header") {
      header_done = true;
      break;
    } else {
      throw Error(ErrorCode::parse, "unexpected PLY header line: " + line);
    }
  }
  if (!header_done) throw Error(ErrorCode::parse, path.string() + ": missing end_header");
  if (!format) throw Error(ErrorCode::parse, path.string() + ": missing format line");

  auto vertex_it = std::find_if(elements.begin(), elements.end(),
                                [](const ElementDef& e) { return e.name == "vertex"; });
  if (vertex_it == elements.end()) throw Error(ErrorCode::parse, "PLY has no vertex element");
  const ElementDef& vertex = *vertex_it;

  auto find_prop = [&](const std::string& name) -> std::optional<std::size_t> {
    for (std::size_t k = 0; k < vertex.properties.size(); ++k) {
      if (vertex.properties[k].name == name && !vertex.properties[k].is_list) return k;
    }
    return std::nullopt;
  };

  std::array<std::size_t, 3> xyz{};
  const std::array<const char*, 3> axis_names{"x", "y", "z"};
  for (int a = 0; a < 3; ++a) {
    auto k = find_prop(axis_names[static_cast<std::size_t>(a)]);
    if (!k) {
      throw Error(ErrorCode::parse,
                  std::string("PLY vertex element lacks property ") + axis_names[static_cast<std::size_t>(a)]);
    }
    xyz[static_cast<std::size_t>(a)] = *k;
  }

  std::vector<std::string> attr_names = attribute_names;
  if (attr_names.empty()) {
    if (find_prop("red") && find_prop("green") && find_prop("blue")) {
      attr_names = {"red", "green", "blue"};
    }
  }
  std::vector<std::size_t> attr_index;
  for (const auto& name : attr_names) {
    auto k = find_prop(name);
    if (!k) throw Error(ErrorCode::parse, "PLY vertex element lacks attribute '" + name + "'");
    attr_index.push_back(*k);
  }

  PointCloud cloud;
  const auto n = static_cast<Eigen::Index>(vertex.count);
  cloud.positions.resize(n, 3);
  cloud.attributes.resize(n, static_cast<Eigen::Index>(attr_index.size()));
  cloud.attribute_names = attr_names;
  cloud.position_type = vertex.properties[xyz[0]].type;
  for (auto k : attr_index) cloud.attribute_types.push_back(vertex.properties[k].type);

  std::vector<double> row;
  auto store_row = [&](Eigen::Index i) {
    for (int a = 0; a < 3; ++a) cloud.positions(i, a) = row[xyz[static_cast<std::size_t>(a)]];
    for (std::size_t c = 0; c < attr_index.size(); ++c) {
      cloud.attributes(i, static_cast<Eigen::Index>(c)) = row[attr_index[c]];
    }
  };

  if (*format == PlyFormat::ascii) {
    for (const auto& e : elements) {
      const bool is_vertex = &e == &vertex;
      for (std::size_t i = 0; i < e.count; ++i) {
        if (!std::getline(in, line)) throw Error(ErrorCode::parse, "PLY ascii payload truncated");
        if (!is_vertex) continue;
        std::istringstream ls(line);
        row.assign(e.properties.size(), 0.0);
        for (std::size_t k = 0; k < e.properties.size(); ++k) {
          if (e.properties[k].is_list) {
            double count = 0.0;
            ls >> count;
            double ignored = 0.0;
            for (int j = 0; j < static_cast<int>(count); ++j) ls >> ignored;
          } else if (!(ls >> row[k])) {
            throw Error(ErrorCode::parse, "bad PLY vertex line: " + line);
          } else if (e.properties[k].type == PlyType::float32) {
            // Shortest float text reads back as the nearest double, not the float.
            row[k] = static_cast<float>(row[k]);
          }
        }
        store_row(static_cast<Eigen::Index>(i));
      }
      if (is_vertex) break;
    }
  } else {
    BinaryReader reader(in, *format == PlyFormat::binary_little_endian);
    for (const auto& e : elements) {
      const bool is_vertex = &e == &vertex;
      for (std::size_t i = 0; i < e.count; ++i) {
        row.assign(e.properties.size(), 0.0);
        for (std::size_t k = 0; k < e.properties.size(); ++k) {
          const auto& prop = e.properties[k];
          if (prop.is_list) {
            const auto count = static_cast<std::size_t>(reader.read(prop.count_type));
            reader.skip(count * type_size(prop.type));
          } else {
            row[k] = reader.read(prop.type);
          }
        }
        if (is_vertex) store_row(static_cast<Eigen::Index>(i));
      }
      if (is_vertex) break;
    }
  }
  return cloud;
}

void save_ply(const std::filesystem::path& path, const PointCloud& cloud, PlyFormat format) {
  if (cloud.attribute_names.size() != cloud.channels() ||
      cloud.attribute_types.size() != cloud.channels()) {
    throw Error(ErrorCode::invalid_argument, "attribute names/types do not match channels");
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io, "cannot open " + path.string() + " for writing");

  out << "ply\n";
  switch (format) {
    case PlyFormat::ascii: out << "format ascii 1.0\n"; break;
    case PlyFormat::binary_little_endian: out << "format binary_little_endian 1.0\n"; break;
    case PlyFormat::binary_big_endian: out << "format binary_big_endian 1.0\n"; break;
  }
  out << "element vertex " << cloud.size() << '\n';
  for (const char* axis : {"x", "y", "z"}) {
    out << "property " << type_name(cloud.position_type) << ' ' << axis << '\n';
  }
  for (std::size_t c = 0; c < cloud.channels(); ++c) {
    out << "property " << type_name(cloud.attribute_types[c]) << ' ' << cloud.attribute_names[c]
        << '\n';
  }
  out << "end_header\n";

  const auto n = static_cast<Eigen::Index>(cloud.size());
  if (format == PlyFormat::ascii) {
    for (Eigen::Index i = 0; i < n; ++i) {
      for (int a = 0; a < 3; ++a) {
        if (a) out << ' ';
        out << format_value(cloud.position_type, cloud.positions(i, a));
      }
      for (std::size_t c = 0; c < cloud.channels(); ++c) {
        out << ' '
            << format_value(cloud.attribute_types[c],
                            cloud.attributes(i, static_cast<Eigen::Index>(c)));
      }
      out << '\n';
    }
  } else {
    BinaryWriter writer(out, format == PlyFormat::binary_little_endian);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (int a = 0; a < 3; ++a) writer.write(cloud.position_type, cloud.positions(i, a));
      for (std::size_t c = 0; c < cloud.channels(); ++c) {
        writer.write(cloud.attribute_types[c], cloud.attributes(i, static_cast<Eigen::Index>(c)));
      }
    }
  }
  if (!out) throw Error(ErrorCode::io, "write failed: " + path.string());
}

}  // namespace mqfb
