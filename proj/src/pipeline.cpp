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

#include "pcx/pipeline.hpp"

#include <set>

#include "json.hpp"
#include "pcx/io.hpp"

namespace pcx {
namespace {

using nlohmann::json;

[[noreturn]] void BadConfig(const std::string& why) { throw Error(ErrorCode::kConfig, why); }

template <typename T>
void Read(const json& obj, const char* key, T& out) {
  if (auto it = obj.find(key); it != obj.end()) {
    try {
      out = it->get<T>();
    } catch (const json::exception& e) {
      BadConfig(std::string("config key '") + key + "': " + e.what());
    }
  }
}

}  // namespace

std::string Fnv1a64Hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void PipelineConfig::Validate() const {
  if (alpha_schedule.empty()) BadConfig("alpha schedule is empty");
  double prev = -1.0;
  for (const auto& step : alpha_schedule) {
    if (!(step.progress >= 0.0 && step.progress <= 1.0) || !(step.progress > prev)) {
      BadConfig("alpha schedule fractions must be strictly increasing in [0, 1]");
    }
    if (!(step.alpha >= 0.0 && step.alpha <= 1.0)) BadConfig("alpha must lie in [0, 1]");
    prev = step.progress;
  }
  if (!(segmentation.threshold > 0.0)) BadConfig("threshold must be > 0");
  if (segmentation.knn_k < 1) BadConfig("knn_k must be >= 1");
  if (segmentation.normal_k < 3) BadConfig("normal_k must be >= 3");
  if (!(segmentation.radius_cap > 0.0)) BadConfig("radius_cap must be > 0");
  if (exchange.beta && !(*exchange.beta >= 0.0 && *exchange.beta <= 1.0)) {
    BadConfig("beta must lie in [0, 1]");
  }
  if (!(exchange.limits.min_side < exchange.limits.max_side)) {
    BadConfig("min_side must be below max_side");
  }
  if (!(loss.lambda >= 0.0 && loss.gamma >= 0.0)) BadConfig("loss weights must be >= 0");
  try {
    augmentation.Validate();
  } catch (const Error& e) {
    BadConfig(e.what());
  }
}

double PipelineConfig::AlphaAt(double progress) const {
  double alpha = alpha_schedule.front().alpha;
  for (const auto& step : alpha_schedule) {
    if (step.progress <= progress) alpha = step.alpha;
  }
  return alpha;
}

SegmentationConfig PipelineConfig::SegmentationAt(double progress) const {
  SegmentationConfig s = segmentation;
  s.alpha = AlphaAt(progress);
  s.threads = threads;
  return s;
}

std::string PipelineConfig::ToJson() const {
  json schedule = json::array();
  for (const auto& step : alpha_schedule) schedule.push_back({step.progress, step.alpha});
  json flips = json::array();
  for (Axis a : augmentation.flip_axes) flips.push_back(a == Axis::kX ? "x" : "y");
  json j = {
      {"seed", seed},
      {"threads", threads},
      {"segmentation",
       {{"alpha_schedule", schedule},
        {"threshold", segmentation.threshold},
        {"knn_k", segmentation.knn_k},
        {"radius_cap", segmentation.radius_cap},
        {"min_points", segmentation.min_points},
        {"normal_k", segmentation.normal_k}}},
      {"exchange",
       {{"beta", exchange.beta ? json(*exchange.beta) : json(nullptr)},
        {"min_side", exchange.limits.min_side},
        {"max_side", exchange.limits.max_side}}},
      {"loss", {{"lambda", loss.lambda}, {"gamma", loss.gamma}}},
      {"augmentation",
       {{"flip_axes", flips},
        {"z_rotation_range", augmentation.z_rotation_range},
        {"scale_min", augmentation.scale_min},
        {"scale_max", augmentation.scale_max},
        {"crop_fraction", augmentation.crop_fraction}}},
  };
  return j.dump();
}

std::string PipelineConfig::Hash() const { return Fnv1a64Hex(ToJson()); }

PipelineConfig PipelineConfig::FromJson(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    BadConfig(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) BadConfig("config must be a JSON object");

  PipelineConfig c;
  Read(j, "seed", c.seed);
  Read(j, "threads", c.threads);
  if (auto it = j.find("segmentation"); it != j.end()) {
    const json& s = *it;
    if (auto sched = s.find("alpha_schedule"); sched != s.end()) {
      c.alpha_schedule.clear();
      if (!sched->is_array()) BadConfig("alpha_schedule must be an array");
      for (const auto& step : *sched) {
        if (!step.is_array() || step.size() != 2 || !step[0].is_number() || !step[1].is_number()) {
          BadConfig("alpha_schedule entries must be [progress, alpha] pairs");
        }
        c.alpha_schedule.push_back({step[0].get<double>(), step[1].get<double>()});
      }
    }
    Read(s, "threshold", c.segmentation.threshold);
    Read(s, "knn_k", c.segmentation.knn_k);
    Read(s, "radius_cap", c.segmentation.radius_cap);
    Read(s, "min_points", c.segmentation.min_points);
    Read(s, "normal_k", c.segmentation.normal_k);
  }
  if (auto it = j.find("exchange"); it != j.end()) {
    const json& e = *it;
    if (auto beta = e.find("beta"); beta != e.end() && !beta->is_null()) {
      if (!beta->is_number()) BadConfig("beta must be a number or null");
      c.exchange.beta = beta->get<double>();
    }
    Read(e, "min_side", c.exchange.limits.min_side);
    Read(e, "max_side", c.exchange.limits.max_side);
  }
  if (auto it = j.find("loss"); it != j.end()) {
    Read(*it, "lambda", c.loss.lambda);
    Read(*it, "gamma", c.loss.gamma);
  }
  if (auto it = j.find("augmentation"); it != j.end()) {
    const json& a = *it;
    if (auto flips = a.find("flip_axes"); flips != a.end()) {
      c.augmentation.flip_axes.clear();
      for (const auto& f : *flips) {
        if (f == "x") {
          c.augmentation.flip_axes.push_back(Axis::kX);
        } else if (f == "y") {
          c.augmentation.flip_axes.push_back(Axis::kY);
        } else {
          BadConfig("flip_axes entries must be \"x\" or \"y\"");
        }
      }
    }
    Read(a, "z_rotation_range", c.augmentation.z_rotation_range);
    Read(a, "scale_min", c.augmentation.scale_min);
    Read(a, "scale_max", c.augmentation.scale_max);
    Read(a, "crop_fraction", c.augmentation.crop_fraction);
  }
  c.augmentation.seed = c.seed;
  c.Validate();
  return c;
}

PipelineConfig PipelineConfig::Load(const std::filesystem::path& path) {
  return FromJson(io::ReadFileBytes(path));
}

std::filesystem::path DatasetManifest::Resolve(const std::filesystem::path& p) const {
  return p.is_absolute() ? p : root / p;
}

void DatasetManifest::Validate() const {
  if (version != "pcx-manifest/1") {
    throw Error(ErrorCode::kManifest, "unsupported manifest version '" + version + "'");
  }
  std::set<std::string> ids;
  for (const auto& s : scenes) {
    if (s.scene_id.empty()) throw Error(ErrorCode::kManifest, "scene with an empty id");
    if (!ids.insert(s.scene_id).second) {
      throw Error(ErrorCode::kManifest, "duplicate scene id '" + s.scene_id + "'");
    }
    for (const auto* p : {&s.cloud, &s.segmentation, &s.features}) {
      if (p->empty()) continue;
      if (!std::filesystem::is_regular_file(Resolve(*p))) {
        throw Error(ErrorCode::kManifest,
                    "scene '" + s.scene_id + "' references missing file " + Resolve(*p).string());
      }
    }
    if (s.cloud.empty()) throw Error(ErrorCode::kManifest, "scene '" + s.scene_id + "' has no cloud");
  }
}

std::string DatasetManifest::ToJson() const {
  json list = json::array();
  for (const auto& s : scenes) {
    json e = {{"id", s.scene_id}, {"cloud", s.cloud.generic_string()}};
    if (!s.segmentation.empty()) e["segmentation"] = s.segmentation.generic_string();
    if (!s.features.empty()) e["features"] = s.features.generic_string();
    list.push_back(std::move(e));
  }
  json j = {{"version", version}, {"root", root.generic_string()}, {"scenes", list}};
  return j.dump(2) + "\n";
}

DatasetManifest DatasetManifest::FromJson(const std::string& text,
                                          const std::filesystem::path& base_dir) {
  DatasetManifest m;
  try {
    const json j = json::parse(text);
    m.version = j.value("version", m.version);
    const std::filesystem::path root = j.value("root", std::string("."));
    m.root = root.is_absolute() ? root : base_dir / root;
    for (const auto& e : j.at("scenes")) {
      ManifestEntry entry;
      entry.scene_id = e.at("id").get<std::string>();
      entry.cloud = e.at("cloud").get<std::string>();
      entry.segmentation = e.value("segmentation", std::string());
      entry.features = e.value("features", std::string());
      m.scenes.push_back(std::move(entry));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kManifest, std::string("manifest: ") + e.what());
  }
  m.Validate();
  return m;
}

DatasetManifest DatasetManifest::Load(const std::filesystem::path& path) {
  return FromJson(io::ReadFileBytes(path), path.parent_path());
}

std::vector<Scene> LoadDataset(const DatasetManifest& manifest, const PipelineConfig& config) {
  manifest.Validate();
  std::vector<Scene> scenes;
  scenes.reserve(manifest.scenes.size());
  for (const auto& entry : manifest.scenes) {
    Scene scene;
    scene.cloud = io::ReadPly(manifest.Resolve(entry.cloud));
    scene.cloud.scene_id = entry.scene_id;
    if (!entry.segmentation.empty()) {
      scene.seg = SegmentationFromLabels(scene.cloud, io::ReadClusters(manifest.Resolve(entry.segmentation)));
    } else if (scene.cloud.clusters) {
      std::vector<std::uint32_t> ids;
      for (auto id : *scene.cloud.clusters) {
        if (id < 0) throw Error(ErrorCode::kInvalidArgument, "negative cluster id in " + entry.scene_id);
        ids.push_back(static_cast<std::uint32_t>(id));
      }
      scene.seg = SegmentationFromLabels(scene.cloud, ids);
    } else {
      Matrix features;
      const Matrix* fptr = nullptr;
      const auto seg_config = config.SegmentationAt(0.0);
      if (!entry.features.empty() && seg_config.alpha > 0.0) {
        features = io::ReadFeatures(manifest.Resolve(entry.features));
        fptr = &features;
      }
      scene.seg = SegmentScene(scene.cloud, fptr, seg_config);
    }
    scenes.push_back(std::move(scene));
  }
  return scenes;
}

void WriteProvenance(const std::filesystem::path& path, const std::string& command,
                     const PipelineConfig& config, std::uint64_t seed,
                     const std::string& params_json) {
  json params;
  try {
    params = json::parse(params_json);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("provenance params: ") + e.what());
  }
  const json j = {{"tool", "pcx"},
                  {"version", kToolVersion},
                  {"command", command},
                  {"seed", seed},
                  {"config_hash", config.Hash()},
                  {"config", json::parse(config.ToJson())},
                  {"params", params}};
  io::WriteFileAtomic(path, j.dump(2) + "\n");
}

}  // namespace pcx
