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

#include "pcx/objective.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace pcx {
namespace {

constexpr double kMinNorm = 1e-12;

Eigen::RowVectorXd Unit(const Eigen::Ref<const Eigen::RowVectorXd>& x, const char* what) {
  const double norm = x.norm();
  if (!(norm >= kMinNorm)) {
    throw Error(ErrorCode::kZeroVector, std::string(what) + " has zero norm");
  }
  return x / norm;
}

// Gradient of g(x / |x|) with respect to x, given dg/dx^ at x^.
Eigen::RowVectorXd ThroughNormalize(const Eigen::Ref<const Eigen::RowVectorXd>& x,
                                    const Eigen::RowVectorXd& x_hat,
                                    const Eigen::RowVectorXd& grad_hat) {
  return (grad_hat - x_hat * x_hat.dot(grad_hat)) / x.norm();
}

void CheckPairShapes(const Eigen::Ref<const Eigen::RowVectorXd>& u,
                     const Eigen::Ref<const Eigen::RowVectorXd>& v, const Matrix& members) {
  if (u.size() != v.size() || members.cols() != u.size()) {
    throw Error(ErrorCode::kShapeMismatch, "pair term operands differ in feature dimension");
  }
  if (members.rows() == 0) {
    throw Error(ErrorCode::kEmptyCluster, "pair term needs at least one member point");
  }
}

}  // namespace

Matrix PoolClusterFeatures(const Matrix& point_features,
                           const std::vector<std::uint32_t>& cluster_of) {
  if (static_cast<std::size_t>(point_features.rows()) != cluster_of.size()) {
    throw Error(ErrorCode::kShapeMismatch, "one cluster id per feature row is required");
  }
  if (cluster_of.empty()) throw Error(ErrorCode::kEmptyCluster, "no points to pool");
  const std::size_t m = *std::max_element(cluster_of.begin(), cluster_of.end()) + 1;
  Matrix pooled = Matrix::Constant(static_cast<Eigen::Index>(m), point_features.cols(),
                                   -std::numeric_limits<double>::infinity());
  std::vector<std::uint8_t> seen(m, 0);
  for (std::size_t i = 0; i < cluster_of.size(); ++i) {
    const auto c = cluster_of[i];
    pooled.row(c) = pooled.row(c).cwiseMax(point_features.row(static_cast<Eigen::Index>(i)));
    seen[c] = 1;
  }
  for (std::size_t c = 0; c < m; ++c) {
    if (!seen[c]) {
      throw Error(ErrorCode::kEmptyCluster, "cluster " + std::to_string(c) + " has no members");
    }
  }
  return pooled;
}

FeatureBundle FeatureBundle::Build(Matrix point_features, std::vector<std::uint32_t> cluster_of) {
  FeatureBundle b;
  b.cluster_features = PoolClusterFeatures(point_features, cluster_of);
  b.members.resize(static_cast<std::size_t>(b.cluster_features.rows()));
  for (std::size_t i = 0; i < cluster_of.size(); ++i) b.members[cluster_of[i]].push_back(i);
  b.point_features = std::move(point_features);
  b.cluster_of = std::move(cluster_of);
  return b;
}

double PairTerm(const Eigen::Ref<const Eigen::RowVectorXd>& cluster_view1,
                const Eigen::Ref<const Eigen::RowVectorXd>& cluster_view2,
                const Matrix& member_points_view1) {
  CheckPairShapes(cluster_view1, cluster_view2, member_points_view1);
  const Eigen::RowVectorXd u = Unit(cluster_view1, "view-1 cluster feature");
  const Eigen::RowVectorXd v = Unit(cluster_view2, "view-2 cluster feature");
  double point_sum = 0.0;
  for (Eigen::Index j = 0; j < member_points_view1.rows(); ++j) {
    point_sum += (Unit(member_points_view1.row(j), "point feature") - v).squaredNorm();
  }
  return (u - v).squaredNorm() + point_sum / static_cast<double>(member_points_view1.rows());
}

PairTermGradient PairTermGrad(const Eigen::Ref<const Eigen::RowVectorXd>& cluster_view1,
                              const Eigen::Ref<const Eigen::RowVectorXd>& cluster_view2,
                              const Matrix& member_points_view1) {
  CheckPairShapes(cluster_view1, cluster_view2, member_points_view1);
  const Eigen::RowVectorXd u = Unit(cluster_view1, "view-1 cluster feature");
  const Eigen::RowVectorXd v = Unit(cluster_view2, "view-2 cluster feature");
  const auto n = static_cast<double>(member_points_view1.rows());

  PairTermGradient g;
  g.d_member_points.resize(member_points_view1.rows(), member_points_view1.cols());
  Eigen::RowVectorXd d_v_hat = -2.0 * (u - v);
  for (Eigen::Index j = 0; j < member_points_view1.rows(); ++j) {
    const Eigen::RowVectorXd p = Unit(member_points_view1.row(j), "point feature");
    const Eigen::RowVectorXd d_p_hat = 2.0 * (p - v) / n;
    g.d_member_points.row(j) = ThroughNormalize(member_points_view1.row(j), p, d_p_hat);
    d_v_hat -= d_p_hat;
  }
  g.d_cluster_view1 = ThroughNormalize(cluster_view1, u, 2.0 * (u - v));
  g.d_cluster_view2 = ThroughNormalize(cluster_view2, v, d_v_hat);
  return g;
}

double DirectionLoss(const LossDirection& direction) {
  if (direction.pairs.empty()) return 0.0;
  if (direction.view1 == nullptr || direction.view2 == nullptr) {
    throw Error(ErrorCode::kInvalidArgument, "loss direction is missing a view");
  }
  const FeatureBundle& one = *direction.view1;
  const FeatureBundle& two = *direction.view2;
  double sum = 0.0;
  Matrix members;
  for (const auto& pair : direction.pairs) {
    if (pair.view1 >= one.num_clusters() || pair.view2 >= two.num_clusters()) {
      throw Error(ErrorCode::kInvalidArgument, "cluster correspondence out of range");
    }
    const auto& idx = one.members[pair.view1];
    members.resize(static_cast<Eigen::Index>(idx.size()), one.point_features.cols());
    for (std::size_t j = 0; j < idx.size(); ++j) {
      members.row(static_cast<Eigen::Index>(j)) =
          one.point_features.row(static_cast<Eigen::Index>(idx[j]));
    }
    sum += PairTerm(one.cluster_features.row(pair.view1), two.cluster_features.row(pair.view2),
                    members);
  }
  return sum / static_cast<double>(direction.pairs.size());
}

double ObjectPatternLoss(const LossDirection& m, const LossDirection& n) {
  return DirectionLoss(m) + DirectionLoss(n);
}

double ContextLoss(const LossDirection& m, const LossDirection& n) {
  return DirectionLoss(m) + DirectionLoss(n);
}

double AuxLoss(const Matrix& logits, const std::vector<std::uint8_t>& mask) {
  if (logits.cols() != 2 || static_cast<std::size_t>(logits.rows()) != mask.size()) {
    throw Error(ErrorCode::kShapeMismatch, "aux loss needs an N x 2 logit matrix matching the mask");
  }
  if (mask.empty()) throw Error(ErrorCode::kShapeMismatch, "aux loss over zero points");
  double sum = 0.0;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    const double z0 = logits(static_cast<Eigen::Index>(i), 0);
    const double z1 = logits(static_cast<Eigen::Index>(i), 1);
    const double top = std::max(z0, z1);
    const double lse = top + std::log(std::exp(z0 - top) + std::exp(z1 - top));
    sum += lse - (mask[i] ? z1 : z0);
  }
  return sum / static_cast<double>(mask.size());
}

double TotalLoss(double context, double object_pattern, double aux, const LossWeights& w) {
  for (double x : {context, object_pattern, aux, w.lambda, w.gamma}) {
    if (!std::isfinite(x) || x < 0.0) {
      throw Error(ErrorCode::kInvalidArgument, "loss terms and weights must be finite and >= 0");
    }
  }
  return context + w.lambda * object_pattern + w.gamma * aux;
}

}  // namespace pcx
