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

#ifndef PCX_SEGMENTATION_HPP_
#define PCX_SEGMENTATION_HPP_

#include <cstdint>
#include <optional>
#include <vector>

#include "pcx/types.hpp"

namespace pcx {

struct WeightedEdge {
  std::uint32_t a;
  std::uint32_t b;
  double weight;
};

/// Sparse affinity graph: D_ij = 2 - (cos(n_i, n_j) + alpha * cos(f_i, f_j))
/// on k-NN edges. Missing edges stand for "not adjacent".
struct AffinityGraph {
  std::vector<WeightedEdge> edges;  // a < b, sorted by (a, b)
  double alpha = 0.0;
  std::size_t n_points = 0;
  // Points whose feature row had (near) zero norm; their feature cosine is 0.
  std::vector<std::size_t> zero_feature_rows;
};

AffinityGraph BuildAffinityGraph(const PointCloud& cloud, const Matrix* features, double alpha,
                                 std::size_t knn_k, double radius_cap, unsigned threads = 0);

// Felzenszwalb-Huttenlocher merging with threshold function tau / |C|.
// Returns compact labels numbered by first appearance.
std::vector<std::uint32_t> GraphCutSegment(const AffinityGraph& graph, double threshold);

// Folds every cluster smaller than min_points into the adjacent cluster with
// the lowest mean connecting weight, smallest clusters first. Clusters without
// neighbors are left alone.
std::vector<std::uint32_t> MergeSmallClusters(const std::vector<std::uint32_t>& labels,
                                              const AffinityGraph& graph,
                                              std::size_t min_points);

struct Cluster {
  std::vector<std::size_t> members;  // ascending point indices
  Vec3 centroid = Vec3::Zero();
  Obb box;
};

struct SceneSegmentation {
  std::vector<std::uint32_t> cluster_of;
  std::vector<Cluster> clusters;

  std::size_t num_clusters() const { return clusters.size(); }
  std::vector<Obb> Boxes() const;
  std::vector<Vec3> Centroids() const;
};

// Groups points by the given ids and computes centroids and boxes. Ids must be
// compact: every value in [0, max] used at least once.
SceneSegmentation SegmentationFromLabels(const PointCloud& cloud,
                                         const std::vector<std::uint32_t>& cluster_of);

// Relabels arbitrary ids to [0, M) by first appearance.
std::vector<std::uint32_t> CompactLabels(const std::vector<std::uint32_t>& labels);

struct SegmentationConfig {
  double alpha = 0.0;
  double threshold = 1.5;
  std::size_t knn_k = 16;
  double radius_cap = 0.5;
  std::size_t min_points = 300;
  std::size_t normal_k = 16;
  unsigned threads = 0;
};

// normals (estimated unless the cloud carries them) -> graph -> cut -> merge
// -> per-cluster centroid and box.
SceneSegmentation SegmentScene(const PointCloud& cloud, const Matrix* features,
                               const SegmentationConfig& config);

}  // namespace pcx

#endif  // PCX_SEGMENTATION_HPP_
