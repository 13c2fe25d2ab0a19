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

#include "pcx/segmentation.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <string>

#include "pcx/geometry.hpp"

namespace pcx {
namespace {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n), size_(n, 1), internal_(n, 0.0) {
    std::iota(parent_.begin(), parent_.end(), 0u);
  }

  std::uint32_t Find(std::uint32_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  // Joins two roots; the merged component's internal difference becomes w.
  void Join(std::uint32_t a, std::uint32_t b, double w) {
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
    internal_[a] = w;
  }

  std::size_t Size(std::uint32_t root) const { return size_[root]; }
  double Internal(std::uint32_t root) const { return internal_[root]; }

 private:
  std::vector<std::uint32_t> parent_;
  std::vector<std::size_t> size_;
  std::vector<double> internal_;
};

double Cosine(const Vec3& a, const Vec3& b) {
  const double denom = a.norm() * b.norm();
  if (denom <= 0.0) return 0.0;
  return std::clamp(a.dot(b) / denom, -1.0, 1.0);
}

}  // namespace

std::vector<Obb> SceneSegmentation::Boxes() const {
  std::vector<Obb> out;
  out.reserve(clusters.size());
  for (const auto& c : clusters) out.push_back(c.box);
  return out;
}

std::vector<Vec3> SceneSegmentation::Centroids() const {
  std::vector<Vec3> out;
  out.reserve(clusters.size());
  for (const auto& c : clusters) out.push_back(c.centroid);
  return out;
}

AffinityGraph BuildAffinityGraph(const PointCloud& cloud, const Matrix* features, double alpha,
                                 std::size_t knn_k, double radius_cap, unsigned threads) {
  if (!cloud.normals) {
    throw Error(ErrorCode::kInvalidArgument, "affinity graph needs normals on the cloud");
  }
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "alpha must lie in [0, 1]");
  }
  if (alpha > 0.0 && features == nullptr) {
    throw Error(ErrorCode::kMissingFeatures, "alpha > 0 requires a feature matrix");
  }
  const std::size_t n = cloud.size();
  AffinityGraph graph;
  graph.n_points = n;
  graph.alpha = features ? alpha : 0.0;

  Matrix unit;
  if (features && graph.alpha > 0.0) {
    if (static_cast<std::size_t>(features->rows()) != n) {
      throw Error(ErrorCode::kShapeMismatch,
                  "feature matrix has " + std::to_string(features->rows()) + " rows for " +
                      std::to_string(n) + " points");
    }
    unit = *features;
    for (Eigen::Index i = 0; i < unit.rows(); ++i) {
      const double norm = unit.row(i).norm();
      if (norm < 1e-12) {
        unit.row(i).setZero();
        graph.zero_feature_rows.push_back(static_cast<std::size_t>(i));
      } else {
        unit.row(i) /= norm;
      }
    }
  }

  const auto& normals = *cloud.normals;
  const auto edges = KnnEdges(cloud.positions, knn_k, radius_cap, threads);
  graph.edges.reserve(edges.size());
  for (const auto& [a, b] : edges) {
    double sim = Cosine(normals[a], normals[b]);
    if (graph.alpha > 0.0) {
      sim += graph.alpha * std::clamp(unit.row(a).dot(unit.row(b)), -1.0, 1.0);
    }
    graph.edges.push_back({a, b, 2.0 - sim});
  }
  return graph;
}

std::vector<std::uint32_t> CompactLabels(const std::vector<std::uint32_t>& labels) {
  std::map<std::uint32_t, std::uint32_t> remap;
  std::vector<std::uint32_t> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto [it, inserted] = remap.try_emplace(labels[i], static_cast<std::uint32_t>(remap.size()));
    out[i] = it->second;
  }
  return out;
}

std::vector<std::uint32_t> GraphCutSegment(const AffinityGraph& graph, double threshold) {
  std::vector<std::size_t> order(graph.edges.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    const auto& ex = graph.edges[x];
    const auto& ey = graph.edges[y];
    if (ex.weight != ey.weight) return ex.weight < ey.weight;
    if (ex.a != ey.a) return ex.a < ey.a;
    return ex.b < ey.b;
  });

  DisjointSets sets(graph.n_points);
  for (std::size_t idx : order) {
    const auto& e = graph.edges[idx];
    const std::uint32_t ra = sets.Find(e.a), rb = sets.Find(e.b);
    if (ra == rb) continue;
    const double limit =
        std::min(sets.Internal(ra) + threshold / static_cast<double>(sets.Size(ra)),
                 sets.Internal(rb) + threshold / static_cast<double>(sets.Size(rb)));
    if (e.weight <= limit) sets.Join(ra, rb, e.weight);
  }

  std::vector<std::uint32_t> roots(graph.n_points);
  for (std::uint32_t i = 0; i < graph.n_points; ++i) roots[i] = sets.Find(i);
  return CompactLabels(roots);
}

std::vector<std::uint32_t> MergeSmallClusters(const std::vector<std::uint32_t>& labels,
                                              const AffinityGraph& graph,
                                              std::size_t min_points) {
  if (labels.size() != graph.n_points) {
    throw Error(ErrorCode::kShapeMismatch, "labels do not match the graph's point count");
  }
  const auto compact = CompactLabels(labels);
  const std::size_t m =
      compact.empty() ? 0 : *std::max_element(compact.begin(), compact.end()) + 1;

  struct Link {
    double weight_sum = 0.0;
    std::size_t count = 0;
  };
  std::vector<std::size_t> sizes(m, 0);
  for (auto c : compact) ++sizes[c];
  std::vector<std::map<std::uint32_t, Link>> adjacency(m);
  for (const auto& e : graph.edges) {
    const auto ca = compact[e.a], cb = compact[e.b];
    if (ca == cb) continue;
    auto& ab = adjacency[ca][cb];
    ab.weight_sum += e.weight;
    ++ab.count;
    auto& ba = adjacency[cb][ca];
    ba.weight_sum += e.weight;
    ++ba.count;
  }

  std::vector<std::uint32_t> target(m);
  std::iota(target.begin(), target.end(), 0u);
  std::set<std::pair<std::size_t, std::uint32_t>> pending;  // (size, id)
  for (std::uint32_t c = 0; c < m; ++c) {
    if (sizes[c] < min_points && !adjacency[c].empty()) pending.emplace(sizes[c], c);
  }

  while (!pending.empty()) {
    const std::uint32_t c = pending.begin()->second;
    pending.erase(pending.begin());

    std::uint32_t into = 0;
    double best_mean = std::numeric_limits<double>::infinity();
    for (const auto& [nb, link] : adjacency[c]) {
      const double mean = link.weight_sum / static_cast<double>(link.count);
      if (mean < best_mean) {
        best_mean = mean;
        into = nb;
      }
    }

    pending.erase({sizes[into], into});
    target[c] = into;
    sizes[into] += sizes[c];
    for (const auto& [nb, link] : adjacency[c]) {
      adjacency[nb].erase(c);
      if (nb == into) continue;
      auto& fwd = adjacency[into][nb];
      fwd.weight_sum += link.weight_sum;
      fwd.count += link.count;
      auto& back = adjacency[nb][into];
      back.weight_sum += link.weight_sum;
      back.count += link.count;
    }
    adjacency[c].clear();
    if (sizes[into] < min_points && !adjacency[into].empty()) pending.emplace(sizes[into], into);
  }

  auto resolve = [&](std::uint32_t c) {
    while (target[c] != c) c = target[c];
    return c;
  };
  std::vector<std::uint32_t> merged(compact.size());
  for (std::size_t i = 0; i < compact.size(); ++i) merged[i] = resolve(compact[i]);
  return CompactLabels(merged);
}

SceneSegmentation SegmentationFromLabels(const PointCloud& cloud,
                                         const std::vector<std::uint32_t>& cluster_of) {
  if (cluster_of.size() != cloud.size()) {
    throw Error(ErrorCode::kShapeMismatch, "cluster ids do not match the cloud's point count");
  }
  SceneSegmentation seg;
  seg.cluster_of = cluster_of;
  const std::size_t m =
      cluster_of.empty() ? 0 : *std::max_element(cluster_of.begin(), cluster_of.end()) + 1;
  seg.clusters.resize(m);
  for (std::size_t i = 0; i < cluster_of.size(); ++i) seg.clusters[cluster_of[i]].members.push_back(i);

  std::vector<Vec3> pts;
  for (std::size_t c = 0; c < m; ++c) {
    auto& cluster = seg.clusters[c];
    if (cluster.members.empty()) {
      throw Error(ErrorCode::kEmptyCluster, "cluster " + std::to_string(c) + " has no points");
    }
    pts.clear();
    Vec3 sum = Vec3::Zero();
    for (auto i : cluster.members) {
      pts.push_back(cloud.positions[i]);
      sum += cloud.positions[i];
    }
    cluster.centroid = sum / static_cast<double>(pts.size());
    cluster.box = MinCircumscribedBox(pts);
  }
  return seg;
}

SceneSegmentation SegmentScene(const PointCloud& cloud, const Matrix* features,
                               const SegmentationConfig& config) {
  cloud.Validate();
  PointCloud working;
  const PointCloud* source = &cloud;
  if (!cloud.normals) {
    working.positions = cloud.positions;
    working.colors = cloud.colors;
    if (cloud.size() >= 3) {
      const std::size_t k = std::min(config.normal_k, cloud.size());
      working.normals = EstimateNormals(working, k, config.threads).normals;
    } else {
      working.normals = std::vector<Vec3>(cloud.size(), Vec3::UnitZ());
    }
    source = &working;
  }
  const auto graph = BuildAffinityGraph(*source, features, config.alpha, config.knn_k,
                                        config.radius_cap, config.threads);
  const auto cut = GraphCutSegment(graph, config.threshold);
  const auto merged = MergeSmallClusters(cut, graph, config.min_points);
  return SegmentationFromLabels(cloud, merged);
}

}  // namespace pcx
