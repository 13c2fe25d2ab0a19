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

#ifndef PCX_GEOMETRY_HPP_
#define PCX_GEOMETRY_HPP_

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "pcx/random.hpp"
#include "pcx/types.hpp"

namespace pcx {

// Number of worker threads to use when a caller passes 0: PCX_THREADS if set
// to a positive integer, otherwise the hardware concurrency.
unsigned ResolveThreads(unsigned requested);

/// Static 3-d tree over a borrowed coordinate array.
///
/// Queries are exact and totally ordered by (squared distance, index), so the
/// result never depends on tree shape.
class KdTree {
 public:
  explicit KdTree(std::span<const Vec3> points);

  // The k nearest points to `query` (fewer if the cloud is smaller), nearest
  // first. `exclude` is skipped when it is a valid index.
  std::vector<std::uint32_t> Nearest(const Vec3& query, std::size_t k,
                                     std::size_t exclude = SIZE_MAX) const;

 private:
  struct Node {
    std::uint32_t begin, end;  // range in order_
    std::int32_t left = -1, right = -1;
    int axis = -1;
    double split = 0.0;
  };

  std::int32_t Build(std::uint32_t begin, std::uint32_t end, int depth);

  std::span<const Vec3> points_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
};

struct NormalEstimate {
  std::vector<Vec3> normals;
  // Indices of points whose neighborhood was collinear or coincident; their
  // normal is (0, 0, 1).
  std::vector<std::size_t> degenerate;
};

// Smallest-eigenvector normals of the k-NN covariance (the point itself is
// one of the k), oriented so that z >= 0 (ties: y, then x).
NormalEstimate EstimateNormals(const PointCloud& cloud, std::size_t k,
                               unsigned threads = 0);

// Applies the z -> y -> x non-negativity rule.
Vec3 OrientNormal(const Vec3& n);

using Edge = std::pair<std::uint32_t, std::uint32_t>;

// Symmetric k-NN edges (i < j, sorted) no longer than radius_cap.
std::vector<Edge> KnnEdges(std::span<const Vec3> positions, std::size_t k,
                           double radius_cap, unsigned threads = 0);

// Greedy max-min selection; ties go to the lowest index.
std::vector<std::size_t> FarthestPointSampling(std::span<const Vec3> positions,
                                               std::size_t count,
                                               std::size_t start);

inline constexpr double kMinBoxExtent = 1e-4;

// Minimum-area footprint rectangle (rotating calipers over the XY convex hull)
// extruded over the z-extent. Dims are canonicalized to length >= width and
// clamped to kMinBoxExtent.
Obb MinCircumscribedBox(std::span<const Vec3> points);

// 2-d convex hull of the XY projection, counter-clockwise, no collinear
// vertices.
std::vector<Eigen::Vector2d> ConvexHull2d(std::span<const Vec3> points);

enum class Axis { kX, kY };

struct AugmentationConfig {
  std::vector<Axis> flip_axes;
  double z_rotation_range = 0.0;  // angle drawn from [-range, range]
  double scale_min = 1.0;
  double scale_max = 1.0;
  double crop_fraction = 1.0;
  std::uint64_t seed = 0;

  void Validate() const;
};

struct AugmentedView {
  PointCloud cloud;
  // Source index of every retained point, ascending.
  std::vector<std::size_t> kept;
  // Set when crop_fraction * N rounded down to zero and the crop center alone
  // was retained.
  bool empty_crop = false;
};

// Flips, z-rotation and scale jitter about the cloud centroid, then keeps the
// floor(crop_fraction * N) points nearest a seeded crop center.
AugmentedView AugmentView(const PointCloud& cloud, const AugmentationConfig& config);

}  // namespace pcx

#endif  // PCX_GEOMETRY_HPP_
