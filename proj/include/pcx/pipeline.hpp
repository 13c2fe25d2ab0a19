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

#ifndef PCX_PIPELINE_HPP_
#define PCX_PIPELINE_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "pcx/exchange.hpp"
#include "pcx/geometry.hpp"
#include "pcx/objective.hpp"
#include "pcx/segmentation.hpp"

namespace pcx {

inline constexpr const char* kToolVersion = "0.3.0";

struct AlphaStep {
  double progress;  // fraction of training, in [0, 1]
  double alpha;
};

/// Everything a reproducible run depends on. Loaded from JSON; missing keys
/// keep their defaults.
///
/// {
///   "seed": 0, "threads": 0,
///   "segmentation": {"alpha_schedule": [[0, 0], [0.333, 0.5], [0.667, 0.5]],
///                    "threshold": 1.5, "knn_k": 16, "radius_cap": 0.5,
///                    "min_points": 300, "normal_k": 16},
///   "exchange": {"beta": null, "min_side": 0.2, "max_side": 3.0},
///   "loss": {"lambda": 1, "gamma": 2},
///   "augmentation": {"flip_axes": ["x", "y"], "z_rotation_range": 0,
///                    "scale_min": 1, "scale_max": 1, "crop_fraction": 1}
/// }
struct PipelineConfig {
  std::vector<AlphaStep> alpha_schedule{{0.0, 0.0}, {1.0 / 3.0, 0.5}, {2.0 / 3.0, 0.5}};
  SegmentationConfig segmentation;
  ExchangeParams exchange;
  LossWeights loss;
  AugmentationConfig augmentation;
  std::uint64_t seed = 0;
  unsigned threads = 0;

  // Throws kConfig on a schedule that is not strictly increasing in [0, 1] or
  // on out-of-range parameters.
  void Validate() const;

  // Alpha of the last schedule step whose progress is <= `progress`.
  double AlphaAt(double progress) const;

  // Segmentation settings with alpha taken from the schedule.
  SegmentationConfig SegmentationAt(double progress) const;

  // Canonical JSON (sorted keys, no whitespace); the hash is FNV-1a 64 of it.
  std::string ToJson() const;
  std::string Hash() const;

  static PipelineConfig FromJson(const std::string& text);
  static PipelineConfig Load(const std::filesystem::path& path);
};

struct ManifestEntry {
  std::string scene_id;
  std::filesystem::path cloud;
  std::filesystem::path segmentation;  // empty when absent
  std::filesystem::path features;      // empty when absent
};

/// {"version": "pcx-manifest/1", "root": ".", "scenes": [{"id": ..., "cloud": ...,
///  "segmentation": ..., "features": ...}]}. Relative paths resolve against
/// root, and a relative root against the manifest's directory.
struct DatasetManifest {
  std::string version = "pcx-manifest/1";
  std::filesystem::path root;
  std::vector<ManifestEntry> scenes;

  // Duplicate ids and dangling paths are rejected with kManifest.
  void Validate() const;
  std::filesystem::path Resolve(const std::filesystem::path& p) const;
  std::string ToJson() const;

  static DatasetManifest FromJson(const std::string& text, const std::filesystem::path& base_dir);
  static DatasetManifest Load(const std::filesystem::path& path);
};

// Reads every scene of a manifest. Scenes without a segmentation file are
// segmented with `config` at progress 0; with one, clusters come from it.
std::vector<Scene> LoadDataset(const DatasetManifest& manifest, const PipelineConfig& config);

// JSON sidecar: tool version, command, seed, config hash, config and extra
// parameters. Contains no timestamps so reruns are byte-identical.
void WriteProvenance(const std::filesystem::path& path, const std::string& command,
                     const PipelineConfig& config, std::uint64_t seed,
                     const std::string& params_json = "{}");

std::string Fnv1a64Hex(std::string_view bytes);

}  // namespace pcx

#endif  // PCX_PIPELINE_HPP_
