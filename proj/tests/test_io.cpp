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

#include <gtest/gtest.h>

#include <filesystem>

#include "fixtures.hpp"
#include "pcx/io.hpp"

namespace pcx::io {
namespace {

namespace fs = std::filesystem;

constexpr const char* kAsciiPly =
    "ply\n"
    "format ascii 1.0\n"
    "comment made by hand\n"
    "element vertex 3\n"
    "property float x\n"
    "property float y\n"
    "property float z\n"
    "property uchar red\n"
    "property uchar green\n"
    "property uchar blue\n"
    "property int label\n"
    "element face 0\n"
    "property list uchar int vertex_indices\n"
    "end_header\n"
    "0 0 0 255 0 0 1\n"
    "1.5 -2.25 3 0 255 0 2\n"
    "0.1 0.2 0.3 0 0 255 255\n";

TEST(Ply, AsciiFixture) {
  const PlyData d = ParsePly(kAsciiPly);
  ASSERT_EQ(d.cloud.size(), 3u);
  EXPECT_EQ(d.layout.encoding, PlyEncoding::kAscii);
  EXPECT_EQ(d.cloud.positions[1], Vec3(1.5, -2.25, 3.0));
  EXPECT_EQ(d.cloud.positions[2].x(), static_cast<double>(0.1f));
  EXPECT_EQ(d.cloud.colors[2], (Rgb{0, 0, 255}));
  EXPECT_EQ(*d.cloud.labels, (std::vector<std::int32_t>{1, 2, 255}));
  EXPECT_FALSE(d.cloud.normals);
}

TEST(Ply, MissingZ) {
  std::string text = kAsciiPly;
  text.erase(text.find("property float z\n"), 17);
  try {
    ParsePly(text);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMissingRequiredProperty);
  }
}

TEST(Ply, BigEndianIsUnsupported) {
  std::string text = kAsciiPly;
  text.replace(text.find("ascii"), 5, "binary_big_endian");
  try {
    ParsePly(text);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnsupportedEncoding);
  }
}

TEST(Ply, MalformedHeaders) {
  for (std::string bad : {std::string("plx\n"), std::string("ply\nformat ascii 1.0\nelement vertex 2\n"),
                          std::string(kAsciiPly).substr(0, std::string(kAsciiPly).size() - 10)}) {
    try {
      ParsePly(bad);
      ADD_FAILURE() << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kMalformedHeader) << bad;
    }
  }
}

TEST(Ply, BinaryRoundTripIsBitIdentical) {
  const auto dir = fixtures::TempDir("io_ply");
  for (auto type : {PositionType::kFloat32, PositionType::kFloat64}) {
    const Scene s = fixtures::SlotScene(4);
    PlyLayout layout;
    layout.position_type = type;
    const std::string bytes = FormatPly(s.cloud, layout);
    const PlyData back = ParsePly(bytes);
    EXPECT_EQ(back.layout.position_type, type);
    EXPECT_EQ(FormatPly(back.cloud, back.layout), bytes);
    WritePly(back.cloud, dir / "x.ply", back.layout);
    EXPECT_EQ(ReadFileBytes(dir / "x.ply"), bytes);
    EXPECT_EQ(*back.cloud.clusters, *s.cloud.clusters);
  }
  fs::remove_all(dir);
}

TEST(Ply, AsciiRoundTripIsExact) {
  const Scene s = fixtures::SlotScene(5);
  PlyLayout layout;
  layout.encoding = PlyEncoding::kAscii;
  layout.position_type = PositionType::kFloat64;
  const PlyData back = ParsePly(FormatPly(s.cloud, layout));
  EXPECT_EQ(back.cloud.positions, s.cloud.positions);
  EXPECT_EQ(back.cloud.colors, s.cloud.colors);
  EXPECT_EQ(FormatPly(back.cloud, layout), FormatPly(s.cloud, layout));
}

TEST(Ply, ReadFileUsesStemAsSceneId) {
  const auto dir = fixtures::TempDir("io_stem");
  WriteFileAtomic(dir / "kitchen.ply", kAsciiPly);
  EXPECT_EQ(ReadPly(dir / "kitchen.ply").scene_id, "kitchen");
  try {
    ReadPly(dir / "missing.ply");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIo);
  }
  fs::remove_all(dir);
}

TEST(Containers, MaskSizeAndRoundTrip) {
  const auto dir = fixtures::TempDir("io_mask");
  const std::vector<std::uint8_t> mask{0, 1, 1, 0, 1};
  WriteMask(mask, dir / "m.bin");
  EXPECT_EQ(fs::file_size(dir / "m.bin"), 16u + 4u * mask.size());
  EXPECT_EQ(ReadMask(dir / "m.bin"), mask);
  const std::string bytes = ReadFileBytes(dir / "m.bin");
  EXPECT_EQ(bytes.substr(0, 8), std::string("PCX1MASK"));
  EXPECT_EQ(static_cast<unsigned char>(bytes[8]), 5u);  // little-endian row count
  fs::remove_all(dir);
}

TEST(Containers, ClustersLabelsFeaturesBundles) {
  const auto dir = fixtures::TempDir("io_containers");
  const std::vector<std::uint32_t> ids{0, 2, 1, 1};
  WriteClusters(ids, dir / "c.bin");
  EXPECT_EQ(ReadClusters(dir / "c.bin"), ids);
  EXPECT_THROW(ReadMask(dir / "c.bin"), Error);  // kind mismatch

  const std::vector<std::int32_t> labels{3, 255, 7};
  WriteLabels(labels, dir / "l.bin");
  EXPECT_EQ(ReadLabels(dir / "l.bin"), labels);
  EXPECT_EQ(ReadLabels(dir / "c.bin"), (std::vector<std::int32_t>{0, 2, 1, 1}));

  Matrix f(2, 3);
  f << 0.5, -1.25, 3, 1e-3f, 0, 7;
  WriteFeatures(f, dir / "f.bin");
  EXPECT_EQ(fs::file_size(dir / "f.bin"), 16u + 4u * 6u);
  const Matrix g = ReadFeatures(dir / "f.bin");
  EXPECT_EQ(g.rows(), 2);
  EXPECT_EQ(g.cols(), 3);
  EXPECT_EQ(g(1, 0), static_cast<double>(1e-3f));

  WriteBundle(f, {1, 0}, dir / "b.bin");
  const FeatureBundle b = ReadBundle(dir / "b.bin");
  EXPECT_EQ(b.cluster_of, (std::vector<std::uint32_t>{1, 0}));
  EXPECT_EQ(b.cluster_features.rows(), 2);
  EXPECT_THROW(WriteBundle(f, {0}, dir / "bad.bin"), Error);

  WriteFileAtomic(dir / "junk.bin", "PCX1MA");
  try {
    ReadMask(dir / "junk.bin");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMalformedHeader);
  }
  fs::remove_all(dir);
}

TEST(Containers, TruncatedPayloadIsRejected) {
  const auto dir = fixtures::TempDir("io_trunc");
  WriteClusters({1, 0, 2}, dir / "c.bin");
  const std::string bytes = ReadFileBytes(dir / "c.bin");
  WriteFileAtomic(dir / "c.bin", bytes.substr(0, bytes.size() - 2));
  EXPECT_THROW(ReadClusters(dir / "c.bin"), Error);
  fs::remove_all(dir);
}

TEST(Atomic, NoTemporaryLeftBehind) {
  const auto dir = fixtures::TempDir("io_atomic");
  WriteFileAtomic(dir / "a.txt", "one");
  WriteFileAtomic(dir / "a.txt", "two");
  EXPECT_EQ(ReadFileBytes(dir / "a.txt"), "two");
  EXPECT_EQ(std::distance(fs::directory_iterator(dir), fs::directory_iterator()), 1);
  EXPECT_THROW(WriteFileAtomic(dir / "no" / "such" / "dir.txt", "x"), Error);
  fs::remove_all(dir);
}

}  // namespace
}  // namespace pcx::io
