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

// Synthetic scenes shared by the unit and acceptance tests.

#ifndef PCX_TESTS_FIXTURES_HPP_
#define PCX_TESTS_FIXTURES_HPP_

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

#include "pcx/exchange.hpp"
#include "pcx/random.hpp"
#include "pcx/types.hpp"

namespace pcx::fixtures {

struct Object {
  Vec3 center;
  Vec3 dims;  // length, width, height before yaw
  double yaw = 0.0;
  std::int32_t label = 0;
};

// n points on the surface of an oriented box, faces chosen by area. Normals
// are the analytic face normals.
inline void AddBoxSurface(PointCloud& cloud, const Object& obj, std::size_t n, Rng& rng,
                          std::int32_t cluster = -1) {
  const double l = obj.dims.x(), w = obj.dims.y(), h = obj.dims.z();
  const double areas[3] = {w * h, l * h, l * w};  // faces normal to x, y, z
  const double total = 2.0 * (areas[0] + areas[1] + areas[2]);
  const double c = std::cos(obj.yaw), s = std::sin(obj.yaw);
  if (!cloud.normals) cloud.normals.emplace(cloud.positions.size(), Vec3(0, 0, 1));
  for (std::size_t i = 0; i < n; ++i) {
    double pick = rng.Uniform() * total;
    int axis = 0;
    while (axis < 2 && pick >= 2.0 * areas[axis]) {
      pick -= 2.0 * areas[axis];
      ++axis;
    }
    const double sign = pick < areas[axis] ? -1.0 : 1.0;
    Vec3 local(rng.Uniform(-0.5, 0.5) * l, rng.Uniform(-0.5, 0.5) * w, rng.Uniform(-0.5, 0.5) * h);
    local[axis] = sign * 0.5 * obj.dims[axis];
    Vec3 normal = Vec3::Zero();
    normal[axis] = sign;
    const Vec3 p(c * local.x() - s * local.y(), s * local.x() + c * local.y(), local.z());
    const Vec3 nr(c * normal.x() - s * normal.y(), s * normal.x() + c * normal.y(), normal.z());
    cloud.positions.push_back(obj.center + p);
    cloud.colors.push_back({static_cast<std::uint8_t>(rng.Index(256)),
                            static_cast<std::uint8_t>(rng.Index(256)),
                            static_cast<std::uint8_t>(rng.Index(256))});
    cloud.normals->push_back(nr);
    if (cloud.labels) cloud.labels->push_back(obj.label);
    if (cloud.clusters) cloud.clusters->push_back(cluster);
  }
}

// Floor (z = 0) meeting a wall (x = 0) at a right angle, plus two 500-point
// boxes floating well clear of both and of each other. About 19k points.
inline PointCloud SyntheticRoom(std::uint64_t seed, bool with_normals = true) {
  Rng rng(seed);
  PointCloud room;
  room.scene_id = "room";
  room.labels.emplace();
  room.normals.emplace();
  const double step = 0.07;
  const int cells = static_cast<int>(std::round(8.0 / step));
  auto jitter = [&] { return rng.Uniform(-0.1, 0.1) * step; };
  for (int i = 0; i <= cells; ++i) {
    for (int j = 0; j <= cells; ++j) {
      room.positions.emplace_back(i * step + jitter(), j * step + jitter(), 0.0);
      room.normals->emplace_back(0, 0, 1);
      room.labels->push_back(1);
    }
  }
  for (int j = 0; j <= cells; ++j) {
    for (int k = 1; k * step <= 3.0; ++k) {
      room.positions.emplace_back(-0.02, j * step + jitter(), k * step + jitter());
      room.normals->emplace_back(1, 0, 0);
      room.labels->push_back(2);
    }
  }
  room.colors.assign(room.positions.size(), {128, 128, 128});
  AddBoxSurface(room, {Vec3(3.0, 4.0, 1.5), Vec3(0.6, 0.6, 0.6), 0.3, 3}, 500, rng);
  AddBoxSurface(room, {Vec3(6.0, 5.5, 1.0), Vec3(0.7, 0.5, 0.5), 1.1, 4}, 500, rng);
  if (!with_normals) room.normals.reset();
  return room;
}

// Objects on a jittered grid of slots spaced far enough apart that no two
// boxes can touch. Ground-truth clusters are the objects.
struct SlotSceneOptions {
  std::size_t objects = 8;
  double slot = 3.5;
  double min_side = 0.3;
  double max_side = 1.6;
  std::size_t min_points = 60;
  std::size_t max_points = 240;
  std::vector<std::int32_t> classes = {3, 4, 5, 6, 7, 8};
};

inline std::vector<Object> SlotObjects(Rng& rng, const SlotSceneOptions& opt) {
  std::vector<Object> objects;
  const std::size_t cols = 4;
  for (std::size_t i = 0; i < opt.objects; ++i) {
    Object o;
    o.center = Vec3(static_cast<double>(i % cols) * opt.slot + rng.Uniform(-0.3, 0.3),
                    static_cast<double>(i / cols) * opt.slot + rng.Uniform(-0.3, 0.3), 0.0);
    o.dims = Vec3(rng.Uniform(opt.min_side, opt.max_side), rng.Uniform(opt.min_side, opt.max_side),
                  rng.Uniform(opt.min_side, opt.max_side));
    o.center.z() = 0.5 * o.dims.z();
    o.yaw = rng.Uniform(0.0, std::numbers::pi);
    o.label = opt.classes[rng.Index(opt.classes.size())];
    objects.push_back(o);
  }
  return objects;
}

inline Scene BuildScene(const std::vector<Object>& objects, Rng& rng, const SlotSceneOptions& opt,
                        const std::string& id) {
  Scene scene;
  scene.cloud.scene_id = id;
  scene.cloud.labels.emplace();
  scene.cloud.clusters.emplace();
  for (std::size_t i = 0; i < objects.size(); ++i) {
    const auto n = opt.min_points + rng.Index(opt.max_points - opt.min_points + 1);
    AddBoxSurface(scene.cloud, objects[i], n, rng, static_cast<std::int32_t>(i));
  }
  std::vector<std::uint32_t> ids(scene.cloud.clusters->begin(), scene.cloud.clusters->end());
  scene.seg = SegmentationFromLabels(scene.cloud, ids);
  return scene;
}

inline Scene SlotScene(std::uint64_t seed, const SlotSceneOptions& opt = {},
                       const std::string& id = "scene") {
  Rng rng(seed);
  return BuildScene(SlotObjects(rng, opt), rng, opt, id);
}

// Fresh empty directory under the system temp dir.
inline std::filesystem::path TempDir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("pcx_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace pcx::fixtures

#endif  // PCX_TESTS_FIXTURES_HPP_
