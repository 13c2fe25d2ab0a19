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

#ifndef PCX_EXCHANGE_HPP_
#define PCX_EXCHANGE_HPP_

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "pcx/segmentation.hpp"
#include "pcx/types.hpp"

namespace pcx {

struct EligibilityLimits {
  double min_side = 0.2;
  double max_side = 3.0;
};

// Clusters whose box has every side in [min_side, max_side].
std::vector<std::uint32_t> EligibleClusters(const SceneSegmentation& seg,
                                            const EligibilityLimits& limits = {});

// beta = 0.5 when more than 20 clusters are eligible, 1 otherwise.
double DefaultExchangeProportion(std::size_t eligible_count);

// Picks floor(beta * |eligible|) clusters: the first half (rounded down) by
// farthest point sampling over centroids from a seeded start, the rest
// uniformly without replacement. An unset beta uses DefaultExchangeProportion.
std::vector<std::uint32_t> SelectExchangeSet(const SceneSegmentation& seg,
                                             const std::vector<std::uint32_t>& eligible,
                                             std::optional<double> beta, std::uint64_t seed);

// V(i, j) = |dims(a_i) - dims(b_j)|.
Matrix BoxSimilarityMatrix(const std::vector<Obb>& boxes_a, const std::vector<Obb>& boxes_b);

// Repeatedly takes the smallest surviving entry (ties: lowest row, then
// column) and removes its row and column.
std::vector<std::pair<std::size_t, std::size_t>> GreedyMatch(const Matrix& v);

struct ClusterPair {
  std::uint32_t a;
  std::uint32_t b;
  Vec3 a_to_b;  // center(box_b) - center(box_a); moves cluster a into scene b
  Vec3 b_to_a;
};

struct ExchangePlan {
  std::vector<std::uint32_t> scene_a_ids;  // selected in A (rows of v)
  std::vector<std::uint32_t> scene_b_ids;  // eligible in B (columns of v)
  Matrix v;
  std::vector<ClusterPair> pairs;
  double beta = 0.0;
  std::uint64_t seed = 0;
};

struct ExchangeParams {
  std::optional<double> beta;
  EligibilityLimits limits;
};

ExchangePlan PlanExchange(const SceneSegmentation& seg_a, const SceneSegmentation& seg_b,
                          const ExchangeParams& params, std::uint64_t seed);

struct Scene {
  PointCloud cloud;
  SceneSegmentation seg;
};

struct ExchangedScene {
  PointCloud cloud;
  SceneSegmentation seg;
  // True for points imported from the partner scene.
  std::vector<std::uint8_t> mask;
};

/// Swaps the planned cluster pairs between two scenes.
///
/// Points that stay keep their order and coordinates; imported clusters are
/// appended in pair order, translated so their box center lands on the
/// partner's box center. The output segmentations carry the transported
/// groupings. If the clouds carry a cluster property it is rewritten to match.
std::pair<ExchangedScene, ExchangedScene> ExchangeObjects(const Scene& a, const Scene& b,
                                                          const ExchangePlan& plan);

struct CorruptedScene {
  ExchangedScene scene;
  std::size_t partner = 0;
  std::size_t replaced = 0;
};

// For every scene m, draws a partner n != m and replaces floor(delta * E_m)
// of m's eligible clusters (E_m of them) with size-matched clusters of n.
// Partners are read-only, so each output depends only on (seed, m).
std::vector<CorruptedScene> MakeCorruptedDataset(const std::vector<Scene>& dataset, double delta,
                                                 std::uint64_t seed,
                                                 const EligibilityLimits& limits = {},
                                                 unsigned threads = 1);

}  // namespace pcx

#endif  // PCX_EXCHANGE_HPP_
