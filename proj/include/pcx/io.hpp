// Copyright 2026 The pcx Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PCX_IO_HPP_
#define PCX_IO_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "pcx/objective.hpp"
#include "pcx/segmentation.hpp"
#include "pcx/types.hpp"

namespace pcx::io {

enum class PlyEncoding { kAscii, kBinaryLittleEndian };
enum class PositionType { kFloat32, kFloat64 };

struct PlyLayout {
  PlyEncoding encoding = PlyEncoding::kBinaryLittleEndian;
  PositionType position_type = PositionType::kFloat32;
};

struct PlyData {
  PointCloud cloud;
  PlyLayout layout;  // as found in the file
};

// Reads the vertex element of an ASCII or binary little-endian PLY file.
// Required: x, y, z, red, green, blue. Optional: nx, ny, nz, label, cluster.
PlyData ReadPlyFile(const std::filesystem::path& path);
PlyData ParsePly(std::string_view bytes);
inline PointCloud ReadPly(const std::filesystem::path& path) { return ReadPlyFile(path).cloud; }

// Normals use the position scalar type; colors are uchar; label and cluster
// are int.
std::string FormatPly(const PointCloud& cloud, const PlyLayout& layout = {});
void WritePly(const PointCloud& cloud, const std::filesystem::path& path,
              const PlyLayout& layout = {});

// PCX1 containers: "PCX1", a 4-byte kind tag, uint32 rows, uint32 cols, then
// a little-endian payload.
inline constexpr std::size_t kHeaderBytes = 16;
inline constexpr std::string_view kMaskKind = "MASK";
inline constexpr std::string_view kClusterKind = "CLUS";
inline constexpr std::string_view kLabelKind = "LABL";
inline constexpr std::string_view kFeatureKind = "FEAT";
inline constexpr std::string_view kBundleKind = "BNDL";

void WriteMask(const std::vector<std::uint8_t>& mask, const std::filesystem::path& path);
std::vector<std::uint8_t> ReadMask(const std::filesystem::path& path);

void WriteClusters(const std::vector<std::uint32_t>& cluster_of, const std::filesystem::path& path);
std::vector<std::uint32_t> ReadClusters(const std::filesystem::path& path);

void WriteLabels(const std::vector<std::int32_t>& labels, const std::filesystem::path& path);
// Accepts any single-column int32 container (labels, clusters or masks).
std::vector<std::int32_t> ReadLabels(const std::filesystem::path& path);

// Stored as float32.
void WriteFeatures(const Matrix& features, const std::filesystem::path& path);
Matrix ReadFeatures(const std::filesystem::path& path);

// N int32 cluster ids followed by N x d float32 features.
void WriteBundle(const Matrix& features, const std::vector<std::uint32_t>& cluster_of,
                 const std::filesystem::path& path);
FeatureBundle ReadBundle(const std::filesystem::path& path);

// Writes to a sibling temp file, then renames over `path`.
void WriteFileAtomic(const std::filesystem::path& path, std::string_view bytes);
std::string ReadFileBytes(const std::filesystem::path& path);

}  // namespace pcx::io

#endif  // PCX_IO_HPP_
