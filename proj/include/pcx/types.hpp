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

#ifndef PCX_TYPES_HPP_
#define PCX_TYPES_HPP_

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace pcx {

using Vec3 = Eigen::Vector3d;
using Rgb = std::array<std::uint8_t, 3>;

// Row-major dense matrix used for per-point features and logits.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class ErrorCode {
  kInvalidArgument,
  kIo,
  kMalformedHeader,
  kUnsupportedEncoding,
  kMissingRequiredProperty,
  kShapeMismatch,
  kMissingFeatures,
  kCountExceedsPopulation,
  kPlanSceneMismatch,
  kInsufficientPartners,
  kEmptyCluster,
  kZeroVector,
  kNoLabels,
  kLengthMismatch,
  kNoValidPoints,
  kDivisionByZero,
  kTooFewClusters,
  kManifest,
  kConfig,
};

const char* ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

/// One scene: positions plus per-point attributes that travel with points.
///
/// `clusters` holds a per-point cluster id when the scene was loaded with one
/// (e.g. a `cluster` PLY property); segmentation results live separately in
/// `SceneSegmentation`.
struct PointCloud {
  std::vector<Vec3> positions;
  std::vector<Rgb> colors;
  std::optional<std::vector<Vec3>> normals;
  std::optional<std::vector<std::int32_t>> labels;
  std::optional<std::vector<std::int32_t>> clusters;
  std::string scene_id;

  std::size_t size() const { return positions.size(); }

  // Throws kShapeMismatch / kInvalidArgument when attribute arrays disagree
  // in length or a normal is not unit length.
  void Validate() const;

  // Copy of the points at `indices`, in the given order.
  PointCloud Subset(const std::vector<std::size_t>& indices) const;

  Vec3 Centroid() const;
};

// Appends `src` to `dst`. Optional attributes are kept only when both sides
// carry them.
void AppendCloud(PointCloud& dst, const PointCloud& src);

/// Gravity-aligned box: free yaw about +z, fixed vertical axis.
struct Obb {
  Vec3 center = Vec3::Zero();
  double yaw = 0.0;  // [0, pi)
  double length = 0.0;
  double width = 0.0;
  double height = 0.0;

  Eigen::Vector3d dims() const { return {length, width, height}; }
  double volume() const { return length * width * height; }
  bool Contains(const Vec3& p, double tol = 1e-6) const;
};

}  // namespace pcx

#endif  // PCX_TYPES_HPP_
