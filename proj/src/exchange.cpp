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

#include "pcx/exchange.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <string>
#include <thread>

#include "pcx/geometry.hpp"
#include "pcx/random.hpp"

namespace pcx {
namespace {

void CheckProportion(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, std::string(name) + " must lie in [0, 1]");
  }
}

std::size_t FloorCount(double proportion, std::size_t total) {
  // The epsilon keeps exact products like 0.3 * 10 from landing on 2.999...
  return static_cast<std::size_t>(std::floor(proportion * static_cast<double>(total) + 1e-9));
}

std::vector<Obb> BoxesOf(const SceneSegmentation& seg, const std::vector<std::uint32_t>& ids) {
  std::vector<Obb> out;
  out.reserve(ids.size());
  for (auto id : ids) out.push_back(seg.clusters[id].box);
  return out;
}

void CheckScene(const Scene& s, const char* name) {
  if (s.seg.cluster_of.size() != s.cloud.size()) {
    throw Error(ErrorCode::kPlanSceneMismatch,
                std::string("segmentation of scene ") + name + " does not cover its cloud");
  }
}

}  // namespace

std::vector<std::uint32_t> EligibleClusters(const SceneSegmentation& seg,
                                            const EligibilityLimits& limits) {
  if (!(limits.min_side < limits.max_side)) {
    throw Error(ErrorCode::kInvalidArgument, "min_side must be below max_side");
  }
  std::vector<std::uint32_t> out;
  for (std::uint32_t c = 0; c < seg.clusters.size(); ++c) {
    const Obb& box = seg.clusters[c].box;
    const bool fits = box.length >= limits.min_side && box.length <= limits.max_side &&
                      box.width >= limits.min_side && box.width <= limits.max_side &&
                      box.height >= limits.min_side && box.height <= limits.max_side;
    if (fits) out.push_back(c);
  }
  return out;
}

double DefaultExchangeProportion(std::size_t eligible_count) {
  return eligible_count > 20 ? 0.5 : 1.0;
}

std::vector<std::uint32_t> SelectExchangeSet(const SceneSegmentation& seg,
                                             const std::vector<std::uint32_t>& eligible,
                                             std::optional<double> beta, std::uint64_t seed) {
  const double b = beta.value_or(DefaultExchangeProportion(eligible.size()));
  CheckProportion(b, "beta");
  for (auto id : eligible) {
    if (id >= seg.clusters.size()) {
      throw Error(ErrorCode::kInvalidArgument, "eligible id " + std::to_string(id) + " out of range");
    }
  }
  const std::size_t target = std::min(FloorCount(b, eligible.size()), eligible.size());
  if (target == 0) return {};

  Rng rng(seed);
  std::vector<std::uint32_t> chosen;
  chosen.reserve(target);
  std::vector<std::uint8_t> used(eligible.size(), 0);

  const std::size_t by_fps = target / 2;
  if (by_fps > 0) {
    std::vector<Vec3> centroids;
    centroids.reserve(eligible.size());
    for (auto id : eligible) centroids.push_back(seg.clusters[id].centroid);
    const std::size_t start = rng.Index(eligible.size());
    for (std::size_t k : FarthestPointSampling(centroids, by_fps, start)) {
      chosen.push_back(eligible[k]);
      used[k] = 1;
    }
  }

  std::vector<std::uint32_t> rest;
  for (std::size_t k = 0; k < eligible.size(); ++k) {
    if (!used[k]) rest.push_back(eligible[k]);
  }
  for (std::size_t i = 0; chosen.size() < target; ++i) {
    const std::size_t j = i + rng.Index(rest.size() - i);
    std::swap(rest[i], rest[j]);
    chosen.push_back(rest[i]);
  }
  return chosen;
}

Matrix BoxSimilarityMatrix(const std::vector<Obb>& boxes_a, const std::vector<Obb>& boxes_b) {
  Matrix v(boxes_a.size(), boxes_b.size());
  for (std::size_t i = 0; i < boxes_a.size(); ++i) {
    for (std::size_t j = 0; j < boxes_b.size(); ++j) {
      v(i, j) = (boxes_a[i].dims() - boxes_b[j].dims()).norm();
    }
  }
  return v;
}

std::vector<std::pair<std::size_t, std::size_t>> GreedyMatch(const Matrix& v) {
  const auto rows = static_cast<std::size_t>(v.rows());
  const auto cols = static_cast<std::size_t>(v.cols());
  std::vector<std::size_t> order(rows * cols);
  for (std::size_t k = 0; k < order.size(); ++k) {
    const double x = v(k / cols, k % cols);
    if (!std::isfinite(x) || x < 0.0) {
      throw Error(ErrorCode::kInvalidArgument, "similarity matrix must be finite and non-negative");
    }
    order[k] = k;
  }
  // Row-major flat index order is exactly the (row, col) tie-break.
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return v(x / cols, x % cols) < v(y / cols, y % cols);
  });

  std::vector<std::uint8_t> row_used(rows, 0), col_used(cols, 0);
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  const std::size_t limit = std::min(rows, cols);
  for (std::size_t k : order) {
    if (pairs.size() == limit) break;
    const std::size_t r = k / cols, c = k % cols;
    if (row_used[r] || col_used[c]) continue;
    row_used[r] = col_used[c] = 1;
    pairs.emplace_back(r, c);
  }
  return pairs;
}

ExchangePlan PlanExchange(const SceneSegmentation& seg_a, const SceneSegmentation& seg_b,
                          const ExchangeParams& params, std::uint64_t seed) {
  ExchangePlan plan;
  plan.seed = seed;
  const auto eligible_a = EligibleClusters(seg_a, params.limits);
  plan.beta = params.beta.value_or(DefaultExchangeProportion(eligible_a.size()));
  plan.scene_a_ids = SelectExchangeSet(seg_a, eligible_a, plan.beta, seed);
  plan.scene_b_ids = EligibleClusters(seg_b, params.limits);
  plan.v = BoxSimilarityMatrix(BoxesOf(seg_a, plan.scene_a_ids), BoxesOf(seg_b, plan.scene_b_ids));
  for (const auto& [r, c] : GreedyMatch(plan.v)) {
    const std::uint32_t a = plan.scene_a_ids[r], b = plan.scene_b_ids[c];
    const Vec3 delta = seg_b.clusters[b].box.center - seg_a.clusters[a].box.center;
    plan.pairs.push_back({a, b, delta, -delta});
  }
  return plan;
}

namespace {

// Builds one side of an exchange: `self` minus its outgoing clusters, plus the
// partner's incoming clusters translated into place.
ExchangedScene Assemble(const Scene& self, const Scene& partner,
                        const std::vector<std::uint32_t>& outgoing,
                        const std::vector<std::uint32_t>& incoming,
                        const std::vector<Vec3>& shifts) {
  const std::size_t m = self.seg.clusters.size();
  std::vector<std::uint8_t> leaving(m, 0);
  for (auto id : outgoing) leaving[id] = 1;

  std::vector<std::uint32_t> new_id(m, 0);
  ExchangedScene out;
  for (std::uint32_t c = 0; c < m; ++c) {
    if (leaving[c]) continue;
    new_id[c] = static_cast<std::uint32_t>(out.seg.clusters.size());
    Cluster cluster = self.seg.clusters[c];
    cluster.members.clear();
    out.seg.clusters.push_back(std::move(cluster));
  }

  std::vector<std::size_t> kept;
  kept.reserve(self.cloud.size());
  for (std::size_t i = 0; i < self.cloud.size(); ++i) {
    const auto c = self.seg.cluster_of[i];
    if (leaving[c]) continue;
    out.seg.clusters[new_id[c]].members.push_back(kept.size());
    out.seg.cluster_of.push_back(new_id[c]);
    kept.push_back(i);
  }
  out.cloud = self.cloud.Subset(kept);
  out.mask.assign(kept.size(), 0);

  for (std::size_t k = 0; k < incoming.size(); ++k) {
    const Cluster& src = partner.seg.clusters[incoming[k]];
    PointCloud moved = partner.cloud.Subset(src.members);
    for (Vec3& p : moved.positions) p += shifts[k];

    Cluster cluster;
    cluster.centroid = src.centroid + shifts[k];
    cluster.box = src.box;
    cluster.box.center += shifts[k];
    const auto id = static_cast<std::uint32_t>(out.seg.clusters.size());
    for (std::size_t j = 0; j < moved.size(); ++j) {
      cluster.members.push_back(out.cloud.size() + j);
      out.seg.cluster_of.push_back(id);
    }
    out.seg.clusters.push_back(std::move(cluster));
    AppendCloud(out.cloud, moved);
    out.mask.resize(out.cloud.size(), 1);
  }

  if (out.cloud.clusters) {
    auto& ids = *out.cloud.clusters;
    for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<std::int32_t>(out.seg.cluster_of[i]);
  }
  out.cloud.scene_id = self.cloud.scene_id;
  return out;
}

}  // namespace

std::pair<ExchangedScene, ExchangedScene> ExchangeObjects(const Scene& a, const Scene& b,
                                                          const ExchangePlan& plan) {
  CheckScene(a, "A");
  CheckScene(b, "B");
  std::vector<std::uint8_t> seen_a(a.seg.clusters.size(), 0), seen_b(b.seg.clusters.size(), 0);
  std::vector<std::uint32_t> ids_a, ids_b;
  std::vector<Vec3> into_a, into_b;
  for (const auto& pair : plan.pairs) {
    if (pair.a >= seen_a.size() || pair.b >= seen_b.size()) {
      throw Error(ErrorCode::kPlanSceneMismatch,
                  "plan pairs clusters (" + std::to_string(pair.a) + ", " + std::to_string(pair.b) +
                      ") that do not exist in the given segmentations");
    }
    if (seen_a[pair.a]++ || seen_b[pair.b]++) {
      throw Error(ErrorCode::kPlanSceneMismatch, "plan reuses a cluster");
    }
    ids_a.push_back(pair.a);
    ids_b.push_back(pair.b);
    into_b.push_back(pair.a_to_b);
    into_a.push_back(pair.b_to_a);
  }
  return {Assemble(a, b, ids_a, ids_b, into_a), Assemble(b, a, ids_b, ids_a, into_b)};
}

std::vector<CorruptedScene> MakeCorruptedDataset(const std::vector<Scene>& dataset, double delta,
                                                 std::uint64_t seed,
                                                 const EligibilityLimits& limits,
                                                 unsigned threads) {
  CheckProportion(delta, "delta");
  if (dataset.size() < 2) {
    throw Error(ErrorCode::kInsufficientPartners, "corruption needs at least two scenes");
  }
  for (const auto& s : dataset) CheckScene(s, s.cloud.scene_id.c_str());

  const std::size_t count = dataset.size();
  std::vector<CorruptedScene> out(count);
  auto corrupt = [&](std::size_t m) {
    Rng rng(MixSeed(seed, m));
    const std::size_t r = rng.Index(count - 1);
    const std::size_t n = r >= m ? r + 1 : r;
    const Scene& self = dataset[m];
    const Scene& partner = dataset[n];

    ExchangePlan plan;
    plan.beta = delta;
    plan.seed = rng.Next();
    plan.scene_a_ids = SelectExchangeSet(self.seg, EligibleClusters(self.seg, limits), delta, plan.seed);
    plan.scene_b_ids = EligibleClusters(partner.seg, limits);
    plan.v = BoxSimilarityMatrix(BoxesOf(self.seg, plan.scene_a_ids),
                                 BoxesOf(partner.seg, plan.scene_b_ids));
    for (const auto& [i, j] : GreedyMatch(plan.v)) {
      const std::uint32_t a = plan.scene_a_ids[i], b = plan.scene_b_ids[j];
      const Vec3 d = partner.seg.clusters[b].box.center - self.seg.clusters[a].box.center;
      plan.pairs.push_back({a, b, d, -d});
    }

    std::vector<std::uint32_t> outgoing, incoming;
    std::vector<Vec3> shifts;
    for (const auto& p : plan.pairs) {
      outgoing.push_back(p.a);
      incoming.push_back(p.b);
      shifts.push_back(p.b_to_a);
    }
    out[m].scene = Assemble(self, partner, outgoing, incoming, shifts);
    out[m].partner = n;
    out[m].replaced = plan.pairs.size();
  };

  const unsigned workers = std::min<std::size_t>(ResolveThreads(threads), count);
  if (workers <= 1) {
    for (std::size_t m = 0; m < count; ++m) corrupt(m);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t m; !failed && (m = next++) < count;) {
          try {
            corrupt(m);
          } catch (...) {
            if (!failed.exchange(true)) failure = std::current_exception();
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace pcx
