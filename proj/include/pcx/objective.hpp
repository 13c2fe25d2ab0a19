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

#ifndef PCX_OBJECTIVE_HPP_
#define PCX_OBJECTIVE_HPP_

#include <cstdint>
#include <vector>

#include "pcx/types.hpp"

namespace pcx {

/// Point features of one view grouped by cluster, with max-pooled cluster
/// features.
struct FeatureBundle {
  Matrix point_features;                   // N x d
  std::vector<std::uint32_t> cluster_of;   // N
  Matrix cluster_features;                 // M x d
  std::vector<std::vector<std::size_t>> members;

  static FeatureBundle Build(Matrix point_features, std::vector<std::uint32_t> cluster_of);

  std::size_t num_points() const { return static_cast<std::size_t>(point_features.rows()); }
  std::size_t num_clusters() const { return static_cast<std::size_t>(cluster_features.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(point_features.cols()); }
};

// Row i is the componentwise max over the members of cluster i. Every id in
// [0, max id] must be used.
Matrix PoolClusterFeatures(const Matrix& point_features,
                           const std::vector<std::uint32_t>& cluster_of);

// |u^ - v^|^2 + mean_j |p_j^ - v^|^2, hats denoting L2-normalized copies.
double PairTerm(const Eigen::Ref<const Eigen::RowVectorXd>& cluster_view1,
                const Eigen::Ref<const Eigen::RowVectorXd>& cluster_view2,
                const Matrix& member_points_view1);

struct PairTermGradient {
  Eigen::RowVectorXd d_cluster_view1;
  Eigen::RowVectorXd d_cluster_view2;
  Matrix d_member_points;
};

PairTermGradient PairTermGrad(const Eigen::Ref<const Eigen::RowVectorXd>& cluster_view1,
                              const Eigen::Ref<const Eigen::RowVectorXd>& cluster_view2,
                              const Matrix& member_points_view1);

struct ClusterCorrespondence {
  std::uint32_t view1;  // cluster id in the first (e.g. exchanged) view
  std::uint32_t view2;  // cluster id of the same object in the reference view
};

/// One direction of a symmetrized loss: clusters of `view1` compared to the
/// same objects in `view2`. Contributes the mean of their pair terms, or 0
/// when `pairs` is empty.
struct LossDirection {
  const FeatureBundle* view1 = nullptr;
  const FeatureBundle* view2 = nullptr;
  std::vector<ClusterCorrespondence> pairs;
};

double DirectionLoss(const LossDirection& direction);

// Sum over the two scene directions, over exchanged clusters.
double ObjectPatternLoss(const LossDirection& m, const LossDirection& n);

// Same contract, over the clusters that stayed in place.
double ContextLoss(const LossDirection& m, const LossDirection& n);

// Mean cross entropy of two-class logits against the relocation mask.
double AuxLoss(const Matrix& logits, const std::vector<std::uint8_t>& mask);

struct LossWeights {
  double lambda = 1.0;
  double gamma = 2.0;
};

double TotalLoss(double context, double object_pattern, double aux, const LossWeights& w = {});

}  // namespace pcx

#endif  // PCX_OBJECTIVE_HPP_
