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
#include <cmath>
#include <numbers>
#include <set>

#include "fixtures.hpp"
#include "pcx/geometry.hpp"
#include "pcx/random.hpp"

namespace pcx {
namespace {

PointCloud CloudOf(std::vector<Vec3> pts) {
  PointCloud c;
  c.positions = std::move(pts);
  c.colors.assign(c.positions.size(), {1, 2, 3});
  return c;
}

TEST(Normals, PlaneGivesUpNormal) {
  Rng rng(1);
  std::vector<Vec3> pts;
  for (int i = 0; i < 1000; ++i) pts.emplace_back(rng.Uniform(0, 10), rng.Uniform(0, 10), 0.0);
  const auto est = EstimateNormals(CloudOf(pts), 10, 1);
  EXPECT_TRUE(est.degenerate.empty());
  for (const auto& n : est.normals) {
    EXPECT_NEAR(n.z(), 1.0, 1e-12);
    EXPECT_NEAR(n.head<2>().norm(), 0.0, 1e-6);
  }
}

TEST(Normals, SphereMatchesRadialDirection) {
  Rng rng(2);
  std::vector<Vec3> pts;
  while (pts.size() < 4000) {
    Vec3 p(rng.Uniform(-1, 1), rng.Uniform(-1, 1), rng.Uniform(-1, 1));
    if (p.norm() < 0.2 || p.norm() > 1.0) continue;
    pts.push_back(p.normalized());
  }
  const auto est = EstimateNormals(CloudOf(pts), 20, 2);
  const double cos5 = std::cos(5.0 * std::numbers::pi / 180.0);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    EXPECT_GE(std::abs(est.normals[i].dot(pts[i])), cos5) << "point " << i;
  }
}

TEST(Normals, CollinearIsDegenerate) {
  std::vector<Vec3> pts;
  for (int i = 0; i < 5; ++i) pts.emplace_back(i, 2.0 * i, 0.5 * i);
  const auto est = EstimateNormals(CloudOf(pts), 4, 1);
  EXPECT_EQ(est.degenerate.size(), 5u);
  for (const auto& n : est.normals) EXPECT_EQ(n, Vec3(0, 0, 1));
}

TEST(Normals, ThreadCountDoesNotChangeResult) {
  const PointCloud room = fixtures::SyntheticRoom(3, false);
  const auto a = EstimateNormals(room, 16, 1);
  const auto b = EstimateNormals(room, 16, 4);
  EXPECT_EQ(a.normals, b.normals);
  EXPECT_EQ(a.degenerate, b.degenerate);
}

TEST(Normals, OrientationRule) {
  EXPECT_EQ(OrientNormal(Vec3(0, 0, -1)), Vec3(0, 0, 1));
  EXPECT_EQ(OrientNormal(Vec3(0, -1, 0)), Vec3(0, 1, 0));
  EXPECT_EQ(OrientNormal(Vec3(-1, 0, 0)), Vec3(1, 0, 0));
  EXPECT_EQ(OrientNormal(Vec3(1, -1, 0)), Vec3(-1, 1, 0));
}

TEST(KdTree, MatchesBruteForceOrdering) {
  Rng rng(3);
  std::vector<Vec3> pts;
  for (int i = 0; i < 500; ++i) pts.emplace_back(double(rng.Index(5)), double(rng.Index(5)), rng.Uniform());
  const KdTree tree(pts);
  for (int q = 0; q < 50; ++q) {
    const Vec3 query(rng.Uniform(0, 4), rng.Uniform(0, 4), rng.Uniform());
    std::vector<std::pair<double, std::uint32_t>> all;
    for (std::uint32_t i = 0; i < pts.size(); ++i) all.emplace_back((pts[i] - query).squaredNorm(), i);
    std::sort(all.begin(), all.end());
    const auto got = tree.Nearest(query, 7);
    ASSERT_EQ(got.size(), 7u);
    for (int k = 0; k < 7; ++k) EXPECT_EQ(got[k], all[k].second);
  }
}

TEST(KnnEdges, TwoPoints) {
  EXPECT_EQ(KnnEdges(std::vector<Vec3>{{0, 0, 0}, {0.1, 0, 0}}, 1, 1.0), (std::vector<Edge>{{0, 1}}));
  EXPECT_TRUE(KnnEdges(std::vector<Vec3>{{0, 0, 0}, {5, 0, 0}}, 1, 1.0).empty());
}

TEST(KnnEdges, GridMatchesAllPairsFilter) {
  std::vector<Vec3> grid;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) grid.emplace_back(i, j, 0);
  }
  const auto edges = KnnEdges(grid, 2, 1.5);
  std::set<Edge> expected;
  for (std::uint32_t i = 0; i < 9; ++i) {
    std::vector<std::pair<double, std::uint32_t>> d;
    for (std::uint32_t j = 0; j < 9; ++j) {
      if (j != i) d.emplace_back((grid[i] - grid[j]).squaredNorm(), j);
    }
    std::sort(d.begin(), d.end());
    for (int t = 0; t < 2; ++t) {
      if (d[t].first <= 2.25) expected.insert({std::min(i, d[t].second), std::max(i, d[t].second)});
    }
  }
  EXPECT_EQ(edges, std::vector<Edge>(expected.begin(), expected.end()));
}

TEST(KnnEdges, RejectsBadArguments) {
  const std::vector<Vec3> p{{0, 0, 0}};
  EXPECT_THROW(KnnEdges(p, 0, 1.0), Error);
  EXPECT_THROW(KnnEdges(p, 1, 0.0), Error);
}

TEST(Fps, LineExample) {
  std::vector<Vec3> line;
  for (int i = 0; i < 10; ++i) line.emplace_back(i, 0, 0);
  EXPECT_EQ(FarthestPointSampling(line, 3, 0), (std::vector<std::size_t>{0, 9, 4}));
}

TEST(Fps, ExhaustionIsPermutation) {
  Rng rng(4);
  std::vector<Vec3> p;
  for (int i = 0; i < 20; ++i) p.emplace_back(rng.Uniform(), rng.Uniform(), rng.Uniform());
  auto order = FarthestPointSampling(p, 20, 7);
  EXPECT_EQ(order.front(), 7u);
  std::sort(order.begin(), order.end());
  for (std::size_t i = 0; i < 20; ++i) EXPECT_EQ(order[i], i);
}

TEST(Fps, CoincidentPointsTieToLowestIndex) {
  const std::vector<Vec3> p(4, Vec3(1, 1, 1));
  EXPECT_EQ(FarthestPointSampling(p, 2, 0), (std::vector<std::size_t>{0, 1}));
}

TEST(Fps, CountBeyondPopulationThrows) {
  const std::vector<Vec3> p(3, Vec3::Zero());
  try {
    FarthestPointSampling(p, 4, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kCountExceedsPopulation);
  }
}

TEST(MinBox, UnitCubeCorners) {
  std::vector<Vec3> corners;
  for (int i = 0; i < 8; ++i) corners.emplace_back(i & 1, (i >> 1) & 1, (i >> 2) & 1);
  const Obb b = MinCircumscribedBox(corners);
  EXPECT_NEAR(b.length, 1.0, 1e-12);
  EXPECT_NEAR(b.width, 1.0, 1e-12);
  EXPECT_NEAR(b.height, 1.0, 1e-12);
  EXPECT_NEAR(b.yaw, 0.0, 1e-12);
  EXPECT_TRUE(b.center.isApprox(Vec3(0.5, 0.5, 0.5)));
}

// Brute-force sweep of footprint areas over 1-degree yaw steps.
double SweepArea(const std::vector<Vec3>& pts, double* best_yaw) {
  double best = std::numeric_limits<double>::infinity();
  for (int deg = 0; deg < 180; ++deg) {
    const double t = deg * std::numbers::pi / 180.0;
    const double c = std::cos(t), s = std::sin(t);
    double lo_u = 1e300, hi_u = -1e300, lo_v = 1e300, hi_v = -1e300;
    for (const auto& p : pts) {
      const double u = c * p.x() + s * p.y(), v = -s * p.x() + c * p.y();
      lo_u = std::min(lo_u, u);
      hi_u = std::max(hi_u, u);
      lo_v = std::min(lo_v, v);
      hi_v = std::max(hi_v, v);
    }
    const double area = (hi_u - lo_u) * (hi_v - lo_v);
    if (area < best - 1e-12) {
      best = area;
      *best_yaw = t;
    }
  }
  return best;
}

TEST(MinBox, RotatedSquare) {
  const double h = std::sqrt(0.5);
  const std::vector<Vec3> sq{{h, 0, 0}, {0, h, 0}, {-h, 0, 0}, {0, -h, 0}};
  const Obb b = MinCircumscribedBox(sq);
  double sweep_yaw = 0.0;
  EXPECT_NEAR(SweepArea(sq, &sweep_yaw), 1.0, 1e-9);
  EXPECT_NEAR(b.length, 1.0, 1e-12);
  EXPECT_NEAR(b.width, 1.0, 1e-12);
  EXPECT_EQ(b.height, kMinBoxExtent);
  EXPECT_NEAR(b.yaw, std::numbers::pi / 4, 1e-12);
  EXPECT_NEAR(sweep_yaw, std::numbers::pi / 4, 1e-12);
}

TEST(MinBox, AreaNeverExceedsSweep) {
  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Vec3> pts;
    const double yaw = rng.Uniform(0, std::numbers::pi);
    for (int i = 0; i < 40; ++i) {
      const double u = rng.Uniform(-1.5, 1.5), v = rng.Uniform(-0.4, 0.4);
      pts.emplace_back(std::cos(yaw) * u - std::sin(yaw) * v, std::sin(yaw) * u + std::cos(yaw) * v,
                       rng.Uniform());
    }
    const Obb b = MinCircumscribedBox(pts);
    double unused = 0.0;
    EXPECT_LE(b.length * b.width, SweepArea(pts, &unused) + 1e-9);
    EXPECT_GE(b.length, b.width);
    for (const auto& p : pts) EXPECT_TRUE(b.Contains(p, 1e-9));
  }
}

TEST(MinBox, SinglePointIsClamped) {
  const Obb b = MinCircumscribedBox(std::vector<Vec3>{{1, 2, 3}});
  EXPECT_EQ(b.dims(), Vec3(kMinBoxExtent, kMinBoxExtent, kMinBoxExtent));
  EXPECT_EQ(b.center, Vec3(1, 2, 3));
}

TEST(ConvexHull, DropsCollinearAndInteriorPoints) {
  const std::vector<Vec3> pts{{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {2, 2, 0}, {0, 2, 0}, {1, 1, 0}};
  EXPECT_EQ(ConvexHull2d(pts).size(), 4u);
}

TEST(Augment, IdentityLeavesCloudUnchanged) {
  const auto s = fixtures::SlotScene(6);
  const AugmentedView v = AugmentView(s.cloud, {});
  EXPECT_EQ(v.cloud.positions, s.cloud.positions);
  EXPECT_EQ(v.cloud.colors, s.cloud.colors);
  EXPECT_EQ(v.kept.size(), s.cloud.size());
}

TEST(Augment, CropKeepsExactCount) {
  Rng rng(7);
  std::vector<Vec3> pts;
  for (int i = 0; i < 1000; ++i) pts.emplace_back(rng.Uniform(), rng.Uniform(), rng.Uniform());
  AugmentationConfig cfg;
  cfg.crop_fraction = 0.5;
  cfg.seed = 3;
  const auto v = AugmentView(CloudOf(pts), cfg);
  EXPECT_EQ(v.cloud.size(), 500u);
  EXPECT_TRUE(std::is_sorted(v.kept.begin(), v.kept.end()));
}

TEST(Augment, SameSeedIsBitIdentical) {
  const auto s = fixtures::SlotScene(8);
  AugmentationConfig cfg;
  cfg.flip_axes = {Axis::kX, Axis::kY};
  cfg.z_rotation_range = std::numbers::pi;
  cfg.scale_min = 0.9;
  cfg.scale_max = 1.1;
  cfg.crop_fraction = 0.8;
  cfg.seed = 11;
  const auto a = AugmentView(s.cloud, cfg);
  const auto b = AugmentView(s.cloud, cfg);
  EXPECT_EQ(a.cloud.positions, b.cloud.positions);
  EXPECT_EQ(a.kept, b.kept);
  cfg.seed = 12;
  EXPECT_NE(AugmentView(s.cloud, cfg).cloud.positions, a.cloud.positions);
}

TEST(Augment, RigidMotionPreservesDistances) {
  const auto s = fixtures::SlotScene(9);
  AugmentationConfig cfg;
  cfg.flip_axes = {Axis::kX};
  cfg.z_rotation_range = 1.0;
  cfg.seed = 4;
  const auto v = AugmentView(s.cloud, cfg);
  for (std::size_t i = 1; i < 50; ++i) {
    EXPECT_NEAR((v.cloud.positions[i] - v.cloud.positions[0]).norm(),
                (s.cloud.positions[i] - s.cloud.positions[0]).norm(), 1e-9);
  }
}

TEST(Augment, RejectsBadConfig) {
  AugmentationConfig cfg;
  cfg.crop_fraction = 0.0;
  EXPECT_THROW(cfg.Validate(), Error);
  cfg.crop_fraction = 1.0;
  cfg.scale_min = 2.0;
  EXPECT_THROW(cfg.Validate(), Error);
}

TEST(Threads, EnvironmentOverride) {
  EXPECT_EQ(ResolveThreads(3), 3u);
  ::setenv("PCX_THREADS", "2", 1);
  EXPECT_EQ(ResolveThreads(0), 2u);
  ::unsetenv("PCX_THREADS");
  EXPECT_GE(ResolveThreads(0), 1u);
}

}  // namespace
}  // namespace pcx
