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

#include <algorithm>
#include <set>

#include "fixtures.hpp"
#include "pcx/geometry.hpp"
#include "pcx/random.hpp"
#include "pcx/segmentation.hpp"

namespace pcx {
namespace {

PointCloud Plane(std::size_t side, double step, const Vec3& origin, const Vec3& normal) {
  PointCloud c;
  c.normals.emplace();
  for (std::size_t i = 0; i < side; ++i) {
    for (std::size_t j = 0; j < side; ++j) {
      c.positions.push_back(origin + Vec3(i * step, j * step, 0));
      c.normals->push_back(normal);
    }
  }
  c.colors.assign(c.positions.size(), {0, 0, 0});
  return c;
}

std::size_t CountDistinct(const std::vector<std::uint32_t>& ids) {
  return std::set<std::uint32_t>(ids.begin(), ids.end()).size();
}

TEST(AffinityGraph, WeightsFollowNormalAndFeatureCosines) {
  PointCloud c;
  c.positions = {{0, 0, 0}, {0.1, 0, 0}};
  c.colors.assign(2, {0, 0, 0});
  c.normals = std::vector<Vec3>{{0, 0, 1}, {0, 0, 1}};
  EXPECT_DOUBLE_EQ(BuildAffinityGraph(c, nullptr, 0.0, 1, 1.0).edges.at(0).weight, 1.0);

  c.normals = std::vector<Vec3>{{0, 0, 1}, {0, 0, -1}};
  EXPECT_DOUBLE_EQ(BuildAffinityGraph(c, nullptr, 0.0, 1, 1.0).edges.at(0).weight, 3.0);

  c.normals = std::vector<Vec3>{{0, 0, 1}, {0, 0, 1}};
  Matrix f(2, 3);
  f << 1, 2, 3, 1, 2, 3;
  EXPECT_DOUBLE_EQ(BuildAffinityGraph(c, &f, 0.5, 1, 1.0).edges.at(0).weight, 0.5);
}

TEST(AffinityGraph, FeatureErrors) {
  PointCloud c;
  c.positions = {{0, 0, 0}, {0.1, 0, 0}};
  c.colors.assign(2, {0, 0, 0});
  c.normals = std::vector<Vec3>{{0, 0, 1}, {0, 0, 1}};
  try {
    BuildAffinityGraph(c, nullptr, 0.5, 1, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMissingFeatures);
  }
  Matrix wrong(3, 2);
  wrong.setOnes();
  try {
    BuildAffinityGraph(c, &wrong, 0.5, 1, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kShapeMismatch);
  }
  Matrix zero = Matrix::Zero(2, 2);
  const auto g = BuildAffinityGraph(c, &zero, 0.5, 1, 1.0);
  EXPECT_EQ(g.zero_feature_rows.size(), 2u);
  EXPECT_DOUBLE_EQ(g.edges.at(0).weight, 1.0);
}

TEST(GraphCut, FlatPlaneIsOneCluster) {
  const PointCloud plane = Plane(20, 0.05, Vec3::Zero(), Vec3(0, 0, 1));
  const auto g = BuildAffinityGraph(plane, nullptr, 0.0, 8, 0.5);
  EXPECT_EQ(CountDistinct(GraphCutSegment(g, 1.5)), 1u);
}

TEST(GraphCut, SeparatedPatchesStayApart) {
  PointCloud a = Plane(10, 0.05, Vec3::Zero(), Vec3(0, 0, 1));
  AppendCloud(a, Plane(10, 0.05, Vec3(10, 0, 0), Vec3(0, 0, 1)));
  const auto labels = GraphCutSegment(BuildAffinityGraph(a, nullptr, 0.0, 8, 0.5), 1.5);
  EXPECT_EQ(CountDistinct(labels), 2u);
  EXPECT_EQ(labels.front(), 0u);
  EXPECT_EQ(labels.back(), 1u);
}

TEST(GraphCut, FloorMeetsWall) {
  PointCloud floor = Plane(20, 0.05, Vec3::Zero(), Vec3(0, 0, 1));
  PointCloud wall;
  wall.normals.emplace();
  for (int j = 0; j < 20; ++j) {
    for (int k = 1; k <= 20; ++k) {
      wall.positions.emplace_back(0, j * 0.05, k * 0.05);
      wall.normals->emplace_back(1, 0, 0);
    }
  }
  wall.colors.assign(wall.positions.size(), {0, 0, 0});
  AppendCloud(floor, wall);
  SegmentationConfig cfg;
  const auto seg = SegmentScene(floor, nullptr, cfg);
  ASSERT_EQ(seg.num_clusters(), 2u);
  EXPECT_EQ(seg.clusters[0].members.size(), 400u);
  EXPECT_EQ(seg.clusters[1].members.size(), 400u);
}

TEST(GraphCut, LabelsAreCompactInFirstAppearanceOrder) {
  EXPECT_EQ(CompactLabels({7, 7, 3, 9, 3}), (std::vector<std::uint32_t>{0, 0, 1, 2, 1}));
}

// Raising the threshold never splits a component: every pair of points that
// shares a cluster at tau shares one at any larger tau on these graphs.
TEST(GraphCut, LargerThresholdNeverIncreasesClusterCount) {
  Rng rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    PointCloud c;
    for (int i = 0; i < 300; ++i) {
      c.positions.emplace_back(rng.Uniform(0, 2), rng.Uniform(0, 2), rng.Uniform(0, 0.3));
    }
    c.colors.assign(c.positions.size(), {0, 0, 0});
    c.normals = EstimateNormals(c, 10, 1).normals;
    const auto g = BuildAffinityGraph(c, nullptr, 0.0, 8, 0.5, 1);
    std::size_t prev = c.size() + 1;
    for (double tau : {0.1, 0.5, 1.5, 5.0, 50.0}) {
      const auto n = CountDistinct(GraphCutSegment(g, tau));
      EXPECT_LE(n, prev) << "tau " << tau;
      prev = n;
    }
  }
}

AffinityGraph ChainGraph(std::size_t n, const std::vector<std::tuple<std::uint32_t, std::uint32_t, double>>& edges) {
  AffinityGraph g;
  g.n_points = n;
  for (auto [a, b, w] : edges) g.edges.push_back({a, b, w});
  return g;
}

TEST(MergeSmall, BigClustersUntouched) {
  std::vector<std::uint32_t> labels(600, 0);
  std::fill(labels.begin() + 300, labels.end(), 1);
  const auto g = ChainGraph(600, {{299, 300, 1.0}});
  EXPECT_EQ(MergeSmallClusters(labels, g, 300), labels);
}

TEST(MergeSmall, ForcedMerge) {
  std::vector<std::uint32_t> labels(550, 0);
  std::fill(labels.begin() + 500, labels.end(), 1);
  const auto g = ChainGraph(550, {{499, 500, 1.0}});
  EXPECT_EQ(CountDistinct(MergeSmallClusters(labels, g, 300)), 1u);
}

TEST(MergeSmall, PicksLowestMeanWeightNeighbor) {
  // Clusters: 0 = [0, 500), 1 = [500, 1000), 2 = [1000, 1050) small.
  std::vector<std::uint32_t> labels(1050, 0);
  std::fill(labels.begin() + 500, labels.begin() + 1000, 1);
  std::fill(labels.begin() + 1000, labels.end(), 2);
  const auto g = ChainGraph(1050, {{0, 1000, 1.4}, {1, 1001, 1.4}, {500, 1002, 0.8}, {501, 1003, 1.0}});
  const auto merged = MergeSmallClusters(labels, g, 300);
  EXPECT_EQ(merged[1000], merged[500]);
  EXPECT_NE(merged[1000], merged[0]);
}

TEST(MergeSmall, IsolatedSmallClusterSurvives) {
  std::vector<std::uint32_t> labels(10, 0);
  labels[9] = 1;
  const auto g = ChainGraph(10, {{0, 1, 1.0}});
  EXPECT_EQ(CountDistinct(MergeSmallClusters(labels, g, 300)), 2u);
}

TEST(SegmentScene, SmallSceneCollapsesToOneCluster) {
  Rng rng(3);
  PointCloud c;
  for (int i = 0; i < 100; ++i) c.positions.emplace_back(rng.Uniform(0, 1), rng.Uniform(0, 1), rng.Uniform(0, 1));
  c.colors.assign(100, {0, 0, 0});
  const auto seg = SegmentScene(c, nullptr, {});
  EXPECT_EQ(seg.num_clusters(), 1u);
}

TEST(SegmentScene, RoomHasFourClustersAndIsDeterministic) {
  const PointCloud room = fixtures::SyntheticRoom(9);
  SegmentationConfig cfg;
  cfg.threads = 1;
  const auto a = SegmentScene(room, nullptr, cfg);
  cfg.threads = 4;
  const auto b = SegmentScene(room, nullptr, cfg);
  EXPECT_EQ(a.num_clusters(), 4u);
  EXPECT_EQ(a.cluster_of, b.cluster_of);
  for (const auto& c : a.clusters) {
    EXPECT_GE(c.members.size(), 300u);
    // Every cluster is one ground-truth surface.
    std::set<std::int32_t> labels;
    for (auto i : c.members) labels.insert((*room.labels)[i]);
    EXPECT_EQ(labels.size(), 1u);
  }
}

TEST(SegmentScene, FeatureTermSplitsByFeature) {
  // One flat plane whose two halves carry orthogonal features.
  PointCloud plane = Plane(40, 0.05, Vec3::Zero(), Vec3(0, 0, 1));
  Matrix f(plane.size(), 2);
  for (std::size_t i = 0; i < plane.size(); ++i) {
    f.row(i) = plane.positions[i].x() < 0.99 ? Eigen::RowVector2d(1, 0) : Eigen::RowVector2d(0, 1);
  }
  SegmentationConfig cfg;
  cfg.alpha = 0.0;
  EXPECT_EQ(SegmentScene(plane, &f, cfg).num_clusters(), 1u);
  cfg.alpha = 1.0;
  cfg.threshold = 0.5;
  EXPECT_EQ(SegmentScene(plane, &f, cfg).num_clusters(), 2u);
}

TEST(SegmentationFromLabels, RejectsGaps) {
  PointCloud c;
  c.positions = {{0, 0, 0}, {1, 0, 0}};
  c.colors.assign(2, {0, 0, 0});
  try {
    SegmentationFromLabels(c, {0, 2});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyCluster);
  }
  const auto seg = SegmentationFromLabels(c, {1, 0});
  EXPECT_EQ(seg.clusters[0].members, (std::vector<std::size_t>{1}));
  EXPECT_EQ(seg.clusters[1].centroid, Vec3(0, 0, 0));
}

}  // namespace
}  // namespace pcx
