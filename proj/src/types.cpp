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

#include "pcx/types.hpp"

#include <cmath>
#include <string>

namespace pcx {

const char* ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kIo: return "IoFailure";
    case ErrorCode::kMalformedHeader: return "MalformedHeader";
    case ErrorCode::kUnsupportedEncoding: return "UnsupportedEncoding";
    case ErrorCode::kMissingRequiredProperty: return "MissingRequiredProperty";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kMissingFeatures: return "MissingFeatures";
    case ErrorCode::kCountExceedsPopulation: return "CountExceedsPopulation";
    case ErrorCode::kPlanSceneMismatch: return "PlanSceneMismatch";
    case ErrorCode::kInsufficientPartners: return "InsufficientPartners";
    case ErrorCode::kEmptyCluster: return "EmptyCluster";
    case ErrorCode::kZeroVector: return "ZeroVector";
    case ErrorCode::kNoLabels: return "NoLabels";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kNoValidPoints: return "NoValidPoints";
    case ErrorCode::kDivisionByZero: return "DivisionByZero";
    case ErrorCode::kTooFewClusters: return "TooFewClusters";
    case ErrorCode::kManifest: return "InvalidManifest";
    case ErrorCode::kConfig: return "InvalidConfig";
  }
  return "Unknown";
}

void PointCloud::Validate() const {
  const std::size_t n = positions.size();
  if (n == 0) throw Error(ErrorCode::kInvalidArgument, "point cloud is empty");
  auto check = [n](std::size_t m, const char* what) {
    if (m != n) {
      throw Error(ErrorCode::kShapeMismatch,
                  std::string(what) + " has " + std::to_string(m) +
                      " entries, expected " + std::to_string(n));
    }
  };
  check(colors.size(), "colors");
  if (normals) {
    check(normals->size(), "normals");
    for (std::size_t i = 0; i < n; ++i) {
      if (std::abs((*normals)[i].norm() - 1.0) > 1e-6) {
        throw Error(ErrorCode::kInvalidArgument,
                    "normal " + std::to_string(i) + " is not unit length");
      }
    }
  }
  if (labels) check(labels->size(), "labels");
  if (clusters) check(clusters->size(), "clusters");
}

PointCloud PointCloud::Subset(const std::vector<std::size_t>& indices) const {
  PointCloud out;
  out.scene_id = scene_id;
  out.positions.reserve(indices.size());
  out.colors.reserve(indices.size());
  if (normals) out.normals.emplace().reserve(indices.size());
  if (labels) out.labels.emplace().reserve(indices.size());
  if (clusters) out.clusters.emplace().reserve(indices.size());
  for (std::size_t i : indices) {
    out.positions.push_back(positions[i]);
    out.colors.push_back(colors[i]);
    if (normals) out.normals->push_back((*normals)[i]);
    if (labels) out.labels->push_back((*labels)[i]);
    if (clusters) out.clusters->push_back((*clusters)[i]);
  }
  return out;
}

Vec3 PointCloud::Centroid() const {
  Vec3 sum = Vec3::Zero();
  for (const Vec3& p : positions) sum += p;
  return positions.empty() ? sum : Vec3(sum / static_cast<double>(positions.size()));
}

void AppendCloud(PointCloud& dst, const PointCloud& src) {
  const bool dst_empty = dst.positions.empty();
  auto merge = [&](auto& d, const auto& s) {
    if (dst_empty && !d) {
      d = s;
      return;
    }
    if (d && s) {
      d->insert(d->end(), s->begin(), s->end());
    } else {
      d.reset();
    }
  };
  merge(dst.normals, src.normals);
  merge(dst.labels, src.labels);
  merge(dst.clusters, src.clusters);
  dst.positions.insert(dst.positions.end(), src.positions.begin(), src.positions.end());
  dst.colors.insert(dst.colors.end(), src.colors.begin(), src.colors.end());
}

bool Obb::Contains(const Vec3& p, double tol) const {
  const double c = std::cos(yaw), s = std::sin(yaw);
  const Vec3 d = p - center;
  const double lx = c * d.x() + s * d.y();
  const double ly = -s * d.x() + c * d.y();
  return std::abs(lx) <= 0.5 * length + tol && std::abs(ly) <= 0.5 * width + tol &&
         std::abs(d.z()) <= 0.5 * height + tol;
}

}  // namespace pcx
