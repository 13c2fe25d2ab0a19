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

#include <cmath>

#include "pcx/objective.hpp"
#include "pcx/random.hpp"

namespace pcx {
namespace {

Matrix Rows(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix m(rows.size(), rows.begin()->size());
  Eigen::Index i = 0;
  for (const auto& r : rows) {
    Eigen::Index j = 0;
    for (double v : r) m(i, j++) = v;
    ++i;
  }
  return m;
}

TEST(Pooling, ComponentwiseMax) {
  const Matrix pooled = PoolClusterFeatures(Rows({{1, 0}, {0, 2}, {-3, 5}}), {0, 0, 1});
  EXPECT_EQ(pooled, Rows({{1, 2}, {-3, 5}}));
  EXPECT_THROW(PoolClusterFeatures(Rows({{1, 0}}), {1}), Error);
  EXPECT_THROW(PoolClusterFeatures(Rows({{1, 0}}), {0, 0}), Error);
}

TEST(PairTerm, HandValues) {
  const Eigen::RowVector2d u(0, 1), v(1, 0);
  EXPECT_DOUBLE_EQ(PairTerm(u, v, Rows({{0, 1}})), 4.0);
  EXPECT_EQ(PairTerm(u, u, Rows({{0, 3}, {0, 2}})), 0.0);
  try {
    PairTerm(Eigen::RowVector2d(0, 0), v, Rows({{0, 1}}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kZeroVector);
  }
}

TEST(PairTerm, BoundedByEight) {
  Rng rng(1);
  for (int t = 0; t < 200; ++t) {
    Eigen::RowVectorXd u(4), v(4);
    Matrix p(5, 4);
    for (int k = 0; k < 4; ++k) {
      u(k) = rng.Uniform(-1, 1);
      v(k) = rng.Uniform(-1, 1);
      for (int j = 0; j < 5; ++j) p(j, k) = rng.Uniform(-1, 1);
    }
    const double x = PairTerm(u, v, p);
    EXPECT_GE(x, 0.0);
    EXPECT_LE(x, 8.0);
  }
}

TEST(PairTerm, GradientMatchesFiniteDifferences) {
  Rng rng(2);
  Eigen::RowVectorXd u(3), v(3);
  Matrix p(4, 3);
  for (int k = 0; k < 3; ++k) {
    u(k) = rng.Uniform(-1, 1);
    v(k) = rng.Uniform(-1, 1);
    for (int j = 0; j < 4; ++j) p(j, k) = rng.Uniform(-1, 1);
  }
  const auto g = PairTermGrad(u, v, p);
  const double h = 1e-6;
  for (int k = 0; k < 3; ++k) {
    Eigen::RowVectorXd up = u, um = u, vp = v, vm = v;
    up(k) += h;
    um(k) -= h;
    vp(k) += h;
    vm(k) -= h;
    EXPECT_NEAR(g.d_cluster_view1(k), (PairTerm(up, v, p) - PairTerm(um, v, p)) / (2 * h), 1e-6);
    EXPECT_NEAR(g.d_cluster_view2(k), (PairTerm(u, vp, p) - PairTerm(u, vm, p)) / (2 * h), 1e-6);
    for (int j = 0; j < 4; ++j) {
      Matrix pp = p, pm = p;
      pp(j, k) += h;
      pm(j, k) -= h;
      EXPECT_NEAR(g.d_member_points(j, k), (PairTerm(u, v, pp) - PairTerm(u, v, pm)) / (2 * h), 1e-6);
    }
  }
}

TEST(Losses, ObjectPatternHandFixture) {
  // Direction m: one cluster, view 1 = (0,1), view 2 = (1,0) -> 4.
  const FeatureBundle hat = FeatureBundle::Build(Rows({{0, 1}}), {0});
  const FeatureBundle bar = FeatureBundle::Build(Rows({{1, 0}}), {0});
  const LossDirection m{&hat, &bar, {{0, 0}}};
  const LossDirection n{&bar, &bar, {{0, 0}}};
  EXPECT_DOUBLE_EQ(ObjectPatternLoss(m, n), 4.0);
  EXPECT_EQ(ObjectPatternLoss(n, n), 0.0);
}

TEST(Losses, DirectionIsMeanOverPairs) {
  const FeatureBundle hat = FeatureBundle::Build(Rows({{0, 1}, {1, 1}}), {0, 1});
  const FeatureBundle bar = FeatureBundle::Build(Rows({{1, 0}, {1, 0}}), {0, 1});
  const double a = DirectionLoss({&hat, &bar, {{0, 0}}});
  const double b = DirectionLoss({&hat, &bar, {{1, 1}}});
  EXPECT_DOUBLE_EQ(DirectionLoss({&hat, &bar, {{0, 0}, {1, 1}}}), (a + b) / 2);
}

TEST(Losses, EmptyContextIsZero) {
  const LossDirection none;
  EXPECT_EQ(ContextLoss(none, none), 0.0);
  const FeatureBundle x = FeatureBundle::Build(Rows({{0.3, 1}, {2, 1}}), {0, 1});
  EXPECT_EQ(ContextLoss({&x, &x, {{0, 0}, {1, 1}}}, {&x, &x, {{1, 1}}}), 0.0);
}

TEST(Losses, AuxCases) {
  EXPECT_LT(AuxLoss(Rows({{20, -20}, {20, -20}}), {0, 0}), 1e-8);
  EXPECT_NEAR(AuxLoss(Rows({{0, 0}, {0, 0}, {0, 0}}), {0, 1, 1}), std::log(2.0), 1e-15);
  const double sigma = std::exp(1.0) / (std::exp(1.0) + 1.0);
  EXPECT_NEAR(AuxLoss(Rows({{1, 0}, {0, 1}}), {0, 1}), -std::log(sigma), 1e-15);
  EXPECT_NEAR(AuxLoss(Rows({{1, 0}, {0, 1}}), {0, 1}), 0.3133, 5e-5);
  // Large logits stay finite.
  EXPECT_NEAR(AuxLoss(Rows({{1000, 0}}), {1}), 1000.0, 1e-9);
  EXPECT_THROW(AuxLoss(Rows({{1, 0}}), {0, 1}), Error);
}

TEST(Losses, TotalComposition) {
  EXPECT_EQ(TotalLoss(0, 0, 0), 0.0);
  EXPECT_EQ(TotalLoss(1, 0.5, 0.25), 2.0);
  EXPECT_EQ(TotalLoss(1, 0.5, 0.25, {2.0, 0.0}), 2.0);
  EXPECT_THROW(TotalLoss(-1, 0, 0), Error);
  EXPECT_THROW(TotalLoss(std::nan(""), 0, 0), Error);
}

}  // namespace
}  // namespace pcx
