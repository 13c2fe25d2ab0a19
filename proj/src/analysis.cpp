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

#include "pcx/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <string>

namespace pcx {

double AffinityMap::At(std::int32_t a, std::int32_t b) const {
  const auto ia = std::lower_bound(classes.begin(), classes.end(), a);
  const auto ib = std::lower_bound(classes.begin(), classes.end(), b);
  if (ia == classes.end() || *ia != a || ib == classes.end() || *ib != b) {
    throw Error(ErrorCode::kInvalidArgument, "class not in affinity map");
  }
  return matrix(ia - classes.begin(), ib - classes.begin());
}

AffinityMap CooccurrenceAffinity(const std::vector<const PointCloud*>& scenes,
                                 const std::optional<std::vector<std::int32_t>>& classes) {
  if (scenes.empty()) throw Error(ErrorCode::kNoLabels, "affinity needs at least one scene");
  std::vector<std::set<std::int32_t>> present(scenes.size());
  std::set<std::int32_t> all;
  for (std::size_t s = 0; s < scenes.size(); ++s) {
    if (!scenes[s]->labels) {
      throw Error(ErrorCode::kNoLabels, "scene '" + scenes[s]->scene_id + "' has no labels");
    }
    for (auto label : *scenes[s]->labels) {
      if (label < 0 || label == kIgnoreLabel) continue;
      present[s].insert(label);
    }
    all.insert(present[s].begin(), present[s].end());
  }

  AffinityMap map;
  map.scene_count = scenes.size();
  if (classes) {
    std::set<std::int32_t> requested(classes->begin(), classes->end());
    map.classes.assign(requested.begin(), requested.end());
  } else {
    map.classes.assign(all.begin(), all.end());
  }
  const std::size_t c = map.classes.size();
  std::vector<double> single(c, 0.0);
  Matrix joint = Matrix::Zero(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(c));
  std::vector<std::size_t> hits;
  for (const auto& labels : present) {
    hits.clear();
    for (std::size_t k = 0; k < c; ++k) {
      if (labels.count(map.classes[k])) hits.push_back(k);
    }
    for (auto a : hits) {
      single[a] += 1.0;
      for (auto b : hits) joint(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) += 1.0;
    }
  }
  map.matrix = Matrix::Zero(joint.rows(), joint.cols());
  for (std::size_t a = 0; a < c; ++a) {
    for (std::size_t b = 0; b < c; ++b) {
      const double denom = std::min(single[a], single[b]);
      if (denom > 0.0) {
        map.matrix(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
            joint(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) / denom;
      }
    }
  }
  return map;
}

SegMetrics ComputeSegMetrics(const std::vector<std::int32_t>& pred,
                             const std::vector<std::int32_t>& gt) {
  if (pred.size() != gt.size()) {
    throw Error(ErrorCode::kLengthMismatch, "prediction has " + std::to_string(pred.size()) +
                                                " points, ground truth " + std::to_string(gt.size()));
  }
  struct Counts {
    std::size_t tp = 0, fp = 0, fn = 0;
    bool in_gt = false;
  };
  std::map<std::int32_t, Counts> counts;
  std::size_t valid = 0, correct = 0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (gt[i] == kIgnoreLabel) continue;
    ++valid;
    counts[gt[i]].in_gt = true;
    if (pred[i] == gt[i]) {
      ++correct;
      ++counts[gt[i]].tp;
    } else {
      ++counts[gt[i]].fn;
      ++counts[pred[i]].fp;
    }
  }
  if (valid == 0) throw Error(ErrorCode::kNoValidPoints, "every point carries the ignore label");

  SegMetrics m;
  // Extended precision keeps small-class means correctly rounded (e.g. 7/12).
  long double sum = 0.0L;
  for (const auto& [cls, c] : counts) {
    if (!c.in_gt) continue;
    const double iou = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp + c.fn);
    m.per_class_iou[cls] = iou;
    sum += static_cast<long double>(c.tp) / static_cast<long double>(c.tp + c.fp + c.fn);
  }
  m.miou = static_cast<double>(sum / static_cast<long double>(m.per_class_iou.size()));
  m.acc = static_cast<double>(correct) / static_cast<double>(valid);
  return m;
}

double RobustnessRatio(double corrupted_miou, double clean_miou) {
  if (!(clean_miou > 0.0)) {
    throw Error(ErrorCode::kDivisionByZero, "clean mIoU must be positive");
  }
  return 100.0 * corrupted_miou / clean_miou;
}

double RobustnessRatio(const SegMetrics& corrupted, const SegMetrics& clean) {
  return RobustnessRatio(corrupted.miou, clean.miou);
}

double BoxIou(const Obb& a, const Obb& b) {
  const double c = std::cos(a.yaw), s = std::sin(a.yaw);
  const Vec3 d = b.center - a.center;
  const double dx = c * d.x() + s * d.y();
  const double dy = -s * d.x() + c * d.y();

  double rel = std::fmod(b.yaw - a.yaw, std::numbers::pi);
  if (rel < 0) rel += std::numbers::pi;
  const bool quarter = rel >= std::numbers::pi / 4 && rel < 3 * std::numbers::pi / 4;
  const double bx = quarter ? b.width : b.length;
  const double by = quarter ? b.length : b.width;

  auto overlap = [](double half_a, double offset, double half_b) {
    return std::max(0.0, std::min(half_a, offset + half_b) - std::max(-half_a, offset - half_b));
  };
  const double inter = overlap(0.5 * a.length, dx, 0.5 * bx) * overlap(0.5 * a.width, dy, 0.5 * by) *
                       overlap(0.5 * a.height, d.z(), 0.5 * b.height);
  const double uni = a.volume() + b.volume() - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

OverlapStats OverlapStatistics(const SceneSegmentation& seg) {
  const std::size_t m = seg.clusters.size();
  if (m < 2) throw Error(ErrorCode::kTooFewClusters, "overlap statistics need >= 2 clusters");
  OverlapStats stats;
  double sum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      const double iou = BoxIou(seg.clusters[i].box, seg.clusters[j].box);
      sum += iou;
      ++pairs;
      stats.max_pairwise_box_iou = std::max(stats.max_pairwise_box_iou, iou);
    }
  }
  stats.mean_pairwise_box_iou = sum / static_cast<double>(pairs);
  return stats;
}

PointCloud Mix3dMerge(const PointCloud& a, const PointCloud& b) {
  a.Validate();
  b.Validate();
  PointCloud ca = a, cb = b;
  const Vec3 ma = a.Centroid(), mb = b.Centroid();
  for (Vec3& p : ca.positions) p -= ma;
  for (Vec3& p : cb.positions) p -= mb;
  if (ca.clusters && cb.clusters && !ca.clusters->empty()) {
    const std::int32_t offset = *std::max_element(ca.clusters->begin(), ca.clusters->end()) + 1;
    for (auto& id : *cb.clusters) id += offset;
  }
  AppendCloud(ca, cb);
  ca.scene_id = a.scene_id + "+" + b.scene_id;
  return ca;
}

}  // namespace pcx
