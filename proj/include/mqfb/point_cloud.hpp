#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace mqfb {

enum class PlyType { int8, uint8, int16, uint16, int32, uint32, float32, float64 };

enum class PlyFormat { ascii, binary_little_endian, binary_big_endian };

// 3D points with per-point attribute channels (for example RGB in [0,255]).
// The PLY storage types are remembered so a loaded cloud saves back with the
// same layout.
struct PointCloud {
  Eigen::MatrixX3d positions;
  Eigen::MatrixXd attributes;  // n x c, c may be zero
  std::vector<std::string> attribute_names;
  PlyType position_type = PlyType::float64;
  std::vector<PlyType> attribute_types;

  std::size_t size() const noexcept { return static_cast<std::size_t>(positions.rows()); }
  std::size_t channels() const noexcept { return static_cast<std::size_t>(attributes.cols()); }

  // Throws unless n >= 2, all coordinates are finite, and attribute
  // metadata matches the attribute matrix.
  void validate() const;

  PointCloud subset(const std::vector<std::size_t>& rows) const;
};

// Reads the `vertex` element. `attribute_names` selects the attribute
// properties; when empty, red/green/blue are used if all three exist and no
// attributes are loaded otherwise.
PointCloud load_ply(const std::filesystem::path& path,
                    const std::vector<std::string>& attribute_names = {});

void save_ply(const std::filesystem::path& path, const PointCloud& cloud,
              PlyFormat format = PlyFormat::binary_little_endian);

}  // namespace mqfb
