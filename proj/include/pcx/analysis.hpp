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

#ifndef PCX_ANALYSIS_HPP_
#define PCX_ANALYSIS_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "pcx/segmentation.hpp"
#include "pcx/types.hpp"

namespace pcx {

inline constexpr std::int32_t kIgnoreLabel = 255;

struct AffinityMap {
  std::vector<std::int32_t> classes;  // ascending
  Matrix matrix;                      // classes.size() square
  std::size_t scene_count = 0;

  double At(std::int32_t a, std::int32_t b) const;
};

// affinity(a, b) = #scenes containing both / min(#scenes with a, #scenes with
// b). Negative and ignore labels are skipped. When `classes` is given the map
// covers exactly those ids; classes that never occur get an all-zero row.
AffinityMap CooccurrenceAffinity(const std::vector<const PointCloud*>& scenes,
                                 const std::optional<std::vector<std::int32_t>>& classes = {});

struct SegMetrics {
  std::map<std::int32_t, double> per_class_iou;
  double miou = 0.0;
  double acc = 0.0;
};

// IoU per class present in gt, their mean, and overall accuracy. Points whose
// gt is kIgnoreLabel are dropped from every count.
SegMetrics ComputeSegMetrics(const std::vector<std::int32_t>& pred,
                             const std::vector<std::int32_t>& gt);

// 100 * corrupted.miou / clean.miou.
double RobustnessRatio(const SegMetrics& corrupted, const SegMetrics& clean);
double RobustnessRatio(double corrupted_miou, double clean_miou);

// Volume IoU of two gravity-aligned boxes. The second box is taken in the
// first box's frame with its yaw snapped to the nearest quarter turn, which is
// exact when the yaws agree modulo pi/2.
double BoxIou(const Obb& a, const Obb& b);

struct OverlapStats {
  double mean_pairwise_box_iou = 0.0;
  double max_pairwise_box_iou = 0.0;
};

OverlapStats OverlapStatistics(const SceneSegmentation& seg);

// Both scenes centered on the origin and concatenated. Cluster ids of the
// second scene are shifted past the first scene's largest id.
PointCloud Mix3dMerge(const PointCloud& a, const PointCloud& b);

}  // namespace pcx

#endif  // PCX_ANALYSIS_HPP_
