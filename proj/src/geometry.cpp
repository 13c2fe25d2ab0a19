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

#include "pcx/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <queue>
#include <string>
#include <thread>

#include <Eigen/Eigenvalues>
#include <Eigen/Geometry>

namespace pcx {
namespace {

constexpr std::uint32_t kLeafSize = 12;

// Runs fn(begin, end) over [0, n) split into contiguous chunks.
template <typename Fn>
void ParallelFor(std::size_t n, unsigned threads, Fn fn) {
  threads = ResolveThreads(threads);
  if (threads <= 1 || n < 2048) {
    fn(std::size_t{0}, n);
    return;
  }
  const std::size_t chunks = std::min<std::size_t>(threads, n);
  std::vector<std::jthread> workers;
  workers.reserve(chunks);
  for (std::size_t c = 0; c < chunks; ++c) {
    const std::size_t b = n * c / chunks, e = n * (c + 1) / chunks;
    workers.emplace_back([&fn, b, e] { fn(b, e); });
  }
}

}  // namespace

unsigned ResolveThreads(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("PCX_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

KdTree::KdTree(std::span<const Vec3> points) : points_(points) {
  order_.resize(points.size());
  for (std::uint32_t i = 0; i < order_.size(); ++i) order_[i] = i;
  if (!order_.empty()) {
    nodes_.reserve(2 * points.size() / kLeafSize + 1);
    Build(0, static_cast<std::uint32_t>(order_.size()), 0);
  }
}

std::int32_t KdTree::Build(std::uint32_t begin, std::uint32_t end, int depth) {
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back(Node{begin, end});
  if (end - begin <= kLeafSize) return id;

  Vec3 lo = points_[order_[begin]], hi = lo;
  for (std::uint32_t i = begin; i < end; ++i) {
    lo = lo.cwiseMin(points_[order_[i]]);
    hi = hi.cwiseMax(points_[order_[i]]);
  }
  int axis;
  (hi - lo).maxCoeff(&axis);
  if (hi[axis] - lo[axis] <= 0.0) return id;  // all coincident

  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     return points_[a][axis] < points_[b][axis];
                   });
  nodes_[id].axis = axis;
  nodes_[id].split = points_[order_[mid]][axis];
  const std::int32_t left = Build(begin, mid, depth + 1);
  const std::int32_t right = Build(mid, end, depth + 1);
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

std::vector<std::uint32_t> KdTree::Nearest(const Vec3& query, std::size_t k,
                                           std::size_t exclude) const {
  using Entry = std::pair<double, std::uint32_t>;
  std::priority_queue<Entry> heap;  // max-heap on (d2, index)
  if (k == 0 || nodes_.empty()) return {};

  auto visit = [&](auto&& self, std::int32_t node_id) -> void {
    const Node& node = nodes_[node_id];
    if (node.axis < 0) {
      for (std::uint32_t i = node.begin; i < node.end; ++i) {
        const std::uint32_t idx = order_[i];
        if (idx == exclude) continue;
        const Entry e{(points_[idx] - query).squaredNorm(), idx};
        if (heap.size() < k) {
          heap.push(e);
        } else if (e < heap.top()) {
          heap.pop();
          heap.push(e);
        }
      }
      return;
    }
    const double diff = query[node.axis] - node.split;
    const std::int32_t near = diff < 0 ? node.left : node.right;
    const std::int32_t far = diff < 0 ? node.right : node.left;
    self(self, near);
    // Equal distances must still be explored for the index tie-break.
    if (heap.size() < k || diff * diff <= heap.top().first) self(self, far);
  };
  visit(visit, 0);

  std::vector<std::uint32_t> out(heap.size());
  for (std::size_t i = out.size(); i-- > 0;) {
    out[i] = heap.top().second;
    heap.pop();
  }
  return out;
}

Vec3 OrientNormal(const Vec3& n) {
  constexpr double kEps = 1e-12;
  for (int axis : {2, 1, 0}) {
    if (n[axis] > kEps) return n;
    if (n[axis] < -kEps) return -n;
  }
  return n;
}

NormalEstimate EstimateNormals(const PointCloud& cloud, std::size_t k, unsigned threads) {
  const std::size_t n = cloud.size();
  if (k < 3) throw Error(ErrorCode::kInvalidArgument, "normal estimation needs k >= 3");
  if (n < k) {
    throw Error(ErrorCode::kInvalidArgument, "cloud has " + std::to_string(n) +
                                                 " points, fewer than k=" + std::to_string(k));
  }
  const KdTree tree(cloud.positions);
  NormalEstimate result;
  result.normals.resize(n);
  std::vector<std::uint8_t> degenerate(n, 0);

  ParallelFor(n, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto nbrs = tree.Nearest(cloud.positions[i], k);
      Vec3 mean = Vec3::Zero();
      for (auto j : nbrs) mean += cloud.positions[j];
      mean /= static_cast<double>(nbrs.size());
      Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
      for (auto j : nbrs) {
        const Vec3 d = cloud.positions[j] - mean;
        cov.noalias() += d * d.transpose();
      }
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov);
      const Vec3 ev = solver.eigenvalues();  // ascending
      if (ev[2] <= 0.0 || ev[1] <= 1e-12 * ev[2]) {
        result.normals[i] = Vec3::UnitZ();
        degenerate[i] = 1;
        continue;
      }
      result.normals[i] = OrientNormal(solver.eigenvectors().col(0).normalized());
    }
  });

  for (std::size_t i = 0; i < n; ++i) {
    if (degenerate[i]) result.degenerate.push_back(i);
  }
  return result;
}

std::vector<Edge> KnnEdges(std::span<const Vec3> positions, std::size_t k, double radius_cap,
                           unsigned threads) {
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "knn_edges needs k >= 1");
  if (!(radius_cap > 0.0)) throw Error(ErrorCode::kInvalidArgument, "radius cap must be > 0");
  const std::size_t n = positions.size();
  const KdTree tree(positions);
  const double cap2 = radius_cap * radius_cap;
  std::vector<std::vector<std::uint32_t>> nbrs(n);
  ParallelFor(n, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) nbrs[i] = tree.Nearest(positions[i], k, i);
  });

  std::vector<Edge> edges;
  edges.reserve(n * k);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::uint32_t j : nbrs[i]) {
      if ((positions[i] - positions[j]).squaredNorm() > cap2) continue;
      const auto a = static_cast<std::uint32_t>(i);
      edges.emplace_back(std::min(a, j), std::max(a, j));
    }
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

std::vector<std::size_t> FarthestPointSampling(std::span<const Vec3> positions,
                                               std::size_t count, std::size_t start) {
  const std::size_t n = positions.size();
  if (count < 1 || count > n) {
    throw Error(ErrorCode::kCountExceedsPopulation,
                "cannot sample " + std::to_string(count) + " of " + std::to_string(n) + " points");
  }
  if (start >= n) throw Error(ErrorCode::kInvalidArgument, "FPS start index out of range");

  std::vector<double> min_d2(n, std::numeric_limits<double>::infinity());
  std::vector<std::uint8_t> taken(n, 0);
  std::vector<std::size_t> out;
  out.reserve(count);
  std::size_t current = start;
  for (;;) {
    out.push_back(current);
    taken[current] = 1;
    if (out.size() == count) break;
    std::size_t best = n;
    double best_d2 = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (taken[i]) continue;
      min_d2[i] = std::min(min_d2[i], (positions[i] - positions[current]).squaredNorm());
      if (min_d2[i] > best_d2) {
        best_d2 = min_d2[i];
        best = i;
      }
    }
    current = best;
  }
  return out;
}

std::vector<Eigen::Vector2d> ConvexHull2d(std::span<const Vec3> points) {
  std::vector<Eigen::Vector2d> pts;
  pts.reserve(points.size());
  for (const Vec3& p : points) pts.emplace_back(p.x(), p.y());
  auto less = [](const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  };
  std::sort(pts.begin(), pts.end(), less);
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;

  auto cross = [](const Eigen::Vector2d& o, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
    return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
  };
  std::vector<Eigen::Vector2d> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

Obb MinCircumscribedBox(std::span<const Vec3> points) {
  if (points.empty()) throw Error(ErrorCode::kInvalidArgument, "box of an empty point set");
  double zmin = points[0].z(), zmax = zmin;
  for (const Vec3& p : points) {
    zmin = std::min(zmin, p.z());
    zmax = std::max(zmax, p.z());
  }
  const auto hull = ConvexHull2d(points);

  // Best rectangle so far, as an axis pair with extents along each.
  Eigen::Vector2d best_u(1.0, 0.0);
  double best_area = std::numeric_limits<double>::infinity();
  double u_lo = hull[0].x(), u_hi = u_lo, v_lo = hull[0].y(), v_hi = v_lo;

  auto try_axis = [&](Eigen::Vector2d u) {
    u.normalize();
    const Eigen::Vector2d v(-u.y(), u.x());
    double a_lo = hull[0].dot(u), a_hi = a_lo, b_lo = hull[0].dot(v), b_hi = b_lo;
    for (const auto& p : hull) {
      const double a = p.dot(u), b = p.dot(v);
      a_lo = std::min(a_lo, a);
      a_hi = std::max(a_hi, a);
      b_lo = std::min(b_lo, b);
      b_hi = std::max(b_hi, b);
    }
    const double area = (a_hi - a_lo) * (b_hi - b_lo);
    if (area < best_area) {
      best_area = area;
      best_u = u;
      u_lo = a_lo, u_hi = a_hi, v_lo = b_lo, v_hi = b_hi;
    }
  };

  if (hull.size() == 2) {
    try_axis(hull[1] - hull[0]);
  } else if (hull.size() >= 3) {
    for (std::size_t i = 0; i < hull.size(); ++i) {
      try_axis(hull[(i + 1) % hull.size()] - hull[i]);
    }
  } else {
    best_area = 0.0;  // single distinct point: axis-aligned, zero extents
  }

  const Eigen::Vector2d best_v(-best_u.y(), best_u.x());
  const Eigen::Vector2d center_xy =
      0.5 * (u_lo + u_hi) * best_u + 0.5 * (v_lo + v_hi) * best_v;
  double ext_u = u_hi - u_lo, ext_v = v_hi - v_lo;

  auto yaw_of = [](const Eigen::Vector2d& axis) {
    double yaw = std::atan2(axis.y(), axis.x());
    if (yaw < 0) yaw += std::numbers::pi;
    if (yaw >= std::numbers::pi) yaw -= std::numbers::pi;
    if (yaw < 0 || yaw >= std::numbers::pi) yaw = 0.0;
    return yaw;
  };
  double yaw_u = yaw_of(best_u), yaw_v = yaw_of(best_v);
  const double tie_tol = 1e-12 * std::max({ext_u, ext_v, 1.0});

  Obb box;
  box.center = Vec3(center_xy.x(), center_xy.y(), 0.5 * (zmin + zmax));
  bool use_u;
  if (std::abs(ext_u - ext_v) <= tie_tol) {
    use_u = yaw_u <= yaw_v;  // square footprint: smaller yaw wins
  } else {
    use_u = ext_u > ext_v;
  }
  box.yaw = use_u ? yaw_u : yaw_v;
  box.length = std::max(use_u ? ext_u : ext_v, kMinBoxExtent);
  box.width = std::max(use_u ? ext_v : ext_u, kMinBoxExtent);
  if (box.width > box.length) std::swap(box.width, box.length);
  box.height = std::max(zmax - zmin, kMinBoxExtent);
  return box;
}

void AugmentationConfig::Validate() const {
  if (!(crop_fraction > 0.0 && crop_fraction <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "crop_fraction must lie in (0, 1]");
  }
  if (!(scale_min > 0.0 && scale_min <= 1.0 && scale_max >= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "scale jitter range must be positive and contain 1");
  }
  if (!(z_rotation_range >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "z_rotation_range must be >= 0");
  }
}

AugmentedView AugmentView(const PointCloud& cloud, const AugmentationConfig& config) {
  config.Validate();
  cloud.Validate();
  const std::size_t n = cloud.size();
  Rng rng(config.seed);

  Eigen::Matrix3d linear = Eigen::Matrix3d::Identity();
  for (Axis axis : config.flip_axes) {
    if (rng.Coin()) linear(axis == Axis::kX ? 0 : 1, axis == Axis::kX ? 0 : 1) *= -1.0;
  }
  if (config.z_rotation_range > 0.0) {
    const double angle = rng.Uniform(-config.z_rotation_range, config.z_rotation_range);
    linear = Eigen::AngleAxisd(angle, Vec3::UnitZ()).toRotationMatrix() * linear;
  }
  double scale = config.scale_min;
  if (config.scale_max > config.scale_min) scale = rng.Uniform(config.scale_min, config.scale_max);

  AugmentedView view;
  view.cloud = cloud;
  if (!linear.isIdentity(0.0) || scale != 1.0) {
    const Vec3 c = cloud.Centroid();
    for (Vec3& p : view.cloud.positions) p = c + scale * (linear * (p - c));
    if (view.cloud.normals) {
      for (Vec3& nrm : *view.cloud.normals) nrm = (linear * nrm).normalized();
    }
  }

  view.kept.resize(n);
  for (std::size_t i = 0; i < n; ++i) view.kept[i] = i;
  if (config.crop_fraction < 1.0) {
    const auto keep =
        static_cast<std::size_t>(std::floor(config.crop_fraction * static_cast<double>(n) + 1e-9));
    const std::size_t center = rng.Index(n);
    if (keep == 0) {
      view.kept = {center};
      view.empty_crop = true;
    } else {
      const Vec3 c = view.cloud.positions[center];
      std::vector<std::pair<double, std::size_t>> order(n);
      for (std::size_t i = 0; i < n; ++i) order[i] = {(view.cloud.positions[i] - c).squaredNorm(), i};
      std::nth_element(order.begin(), order.begin() + (keep - 1), order.end());
      view.kept.resize(keep);
      for (std::size_t i = 0; i < keep; ++i) view.kept[i] = order[i].second;
      std::sort(view.kept.begin(), view.kept.end());
    }
    view.cloud = view.cloud.Subset(view.kept);
  }
  return view;
}

}  // namespace pcx
