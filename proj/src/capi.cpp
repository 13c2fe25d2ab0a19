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

#include "pcx/pcx.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <memory>
#include <new>
#include <string>

#include "json.hpp"
#include "pcx/analysis.hpp"
#include "pcx/exchange.hpp"
#include "pcx/io.hpp"
#include "pcx/objective.hpp"
#include "pcx/pipeline.hpp"
#include "pcx/segmentation.hpp"

struct pcx_config {
  pcx::PipelineConfig config;
};

struct pcx_cloud {
  pcx::PointCloud cloud;
  pcx::io::PlyLayout layout;
};

struct pcx_matrix {
  pcx::Matrix m;
};

struct pcx_segmentation {
  pcx::SceneSegmentation seg;
};

struct pcx_mask {
  std::vector<std::uint8_t> flags;
};

struct pcx_exchange_result {
  pcx_cloud cloud[2];
  pcx_segmentation seg[2];
  pcx_mask mask[2];
  std::size_t pairs = 0;
};

struct pcx_dataset {
  std::vector<pcx::Scene> scenes;
  std::vector<std::vector<std::uint8_t>> masks;  // empty unless corrupted
  std::vector<std::size_t> replaced;
};

struct pcx_metrics {
  pcx::SegMetrics m;
};

struct pcx_bundle {
  pcx::FeatureBundle b;
};

namespace {

thread_local std::string g_last_error;

pcx_status ToStatus(pcx::ErrorCode code) {
  using pcx::ErrorCode;
  switch (code) {
    case ErrorCode::kInvalidArgument: return PCX_ERR_INVALID_ARGUMENT;
    case ErrorCode::kIo: return PCX_ERR_IO;
    case ErrorCode::kMalformedHeader: return PCX_ERR_MALFORMED_HEADER;
    case ErrorCode::kUnsupportedEncoding: return PCX_ERR_UNSUPPORTED_ENCODING;
    case ErrorCode::kMissingRequiredProperty: return PCX_ERR_MISSING_PROPERTY;
    case ErrorCode::kShapeMismatch: return PCX_ERR_SHAPE_MISMATCH;
    case ErrorCode::kMissingFeatures: return PCX_ERR_MISSING_FEATURES;
    case ErrorCode::kCountExceedsPopulation: return PCX_ERR_COUNT_EXCEEDS_POPULATION;
    case ErrorCode::kPlanSceneMismatch: return PCX_ERR_PLAN_SCENE_MISMATCH;
    case ErrorCode::kInsufficientPartners: return PCX_ERR_INSUFFICIENT_PARTNERS;
    case ErrorCode::kEmptyCluster: return PCX_ERR_EMPTY_CLUSTER;
    case ErrorCode::kZeroVector: return PCX_ERR_ZERO_VECTOR;
    case ErrorCode::kNoLabels: return PCX_ERR_NO_LABELS;
    case ErrorCode::kLengthMismatch: return PCX_ERR_LENGTH_MISMATCH;
    case ErrorCode::kNoValidPoints: return PCX_ERR_NO_VALID_POINTS;
    case ErrorCode::kDivisionByZero: return PCX_ERR_DIVISION_BY_ZERO;
    case ErrorCode::kTooFewClusters: return PCX_ERR_TOO_FEW_CLUSTERS;
    case ErrorCode::kManifest: return PCX_ERR_MANIFEST;
    case ErrorCode::kConfig: return PCX_ERR_CONFIG;
  }
  return PCX_ERR_INTERNAL;
}

pcx_status Fail(pcx_status status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

// Runs fn, translating exceptions into status codes.
template <typename Fn>
pcx_status Guard(Fn&& fn) {
  try {
    fn();
    return PCX_OK;
  } catch (const pcx::Error& e) {
    return Fail(ToStatus(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return Fail(PCX_ERR_OUT_OF_MEMORY, "out of memory");
  } catch (const std::exception& e) {
    return Fail(PCX_ERR_INTERNAL, e.what());
  } catch (...) {
    return Fail(PCX_ERR_INTERNAL, "unknown error");
  }
}

void Require(bool ok, const char* what) {
  if (!ok) throw pcx::Error(pcx::ErrorCode::kInvalidArgument, what);
}

pcx::io::PlyLayout ToLayout(const pcx_ply_layout& l) {
  pcx::io::PlyLayout out;
  out.encoding = l.encoding == PCX_PLY_ASCII ? pcx::io::PlyEncoding::kAscii
                                             : pcx::io::PlyEncoding::kBinaryLittleEndian;
  out.position_type = l.position_type == PCX_POSITION_FLOAT64 ? pcx::io::PositionType::kFloat64
                                                              : pcx::io::PositionType::kFloat32;
  return out;
}

std::string FormatDouble(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

}  // namespace

extern "C" {

const char* pcx_version(void) { return pcx::kToolVersion; }

const char* pcx_status_name(pcx_status status) {
  switch (status) {
    case PCX_OK: return "Ok";
    case PCX_ERR_INVALID_ARGUMENT: return "InvalidArgument";
    case PCX_ERR_CONFIG: return "InvalidConfig";
    case PCX_ERR_IO: return "IoFailure";
    case PCX_ERR_MALFORMED_HEADER: return "MalformedHeader";
    case PCX_ERR_UNSUPPORTED_ENCODING: return "UnsupportedEncoding";
    case PCX_ERR_MISSING_PROPERTY: return "MissingRequiredProperty";
    case PCX_ERR_SHAPE_MISMATCH: return "ShapeMismatch";
    case PCX_ERR_MISSING_FEATURES: return "MissingFeatures";
    case PCX_ERR_COUNT_EXCEEDS_POPULATION: return "CountExceedsPopulation";
    case PCX_ERR_PLAN_SCENE_MISMATCH: return "PlanSceneMismatch";
    case PCX_ERR_INSUFFICIENT_PARTNERS: return "InsufficientPartners";
    case PCX_ERR_EMPTY_CLUSTER: return "EmptyCluster";
    case PCX_ERR_ZERO_VECTOR: return "ZeroVector";
    case PCX_ERR_NO_LABELS: return "NoLabels";
    case PCX_ERR_LENGTH_MISMATCH: return "LengthMismatch";
    case PCX_ERR_NO_VALID_POINTS: return "NoValidPoints";
    case PCX_ERR_DIVISION_BY_ZERO: return "DivisionByZero";
    case PCX_ERR_TOO_FEW_CLUSTERS: return "TooFewClusters";
    case PCX_ERR_MANIFEST: return "InvalidManifest";
    case PCX_ERR_OUT_OF_MEMORY: return "OutOfMemory";
    case PCX_ERR_INTERNAL: return "Internal";
  }
  return "Unknown";
}

const char* pcx_last_error(void) { return g_last_error.c_str(); }

// ---- configuration

pcx_status pcx_config_default(pcx_config** out) {
  return Guard([&] {
    Require(out != nullptr, "out is null");
    *out = new pcx_config{};
  });
}

pcx_status pcx_config_load(const char* path, pcx_config** out) {
  return Guard([&] {
    Require(path && out, "null argument");
    *out = new pcx_config{pcx::PipelineConfig::Load(path)};
  });
}

pcx_status pcx_config_set_seed(pcx_config* config, uint64_t seed) {
  return Guard([&] {
    Require(config, "config is null");
    config->config.seed = seed;
    config->config.augmentation.seed = seed;
  });
}

pcx_status pcx_config_set_beta(pcx_config* config, double beta) {
  return Guard([&] {
    Require(config, "config is null");
    if (std::isnan(beta)) {
      config->config.exchange.beta.reset();
      return;
    }
    Require(beta >= 0.0 && beta <= 1.0, "beta must lie in [0, 1]");
    config->config.exchange.beta = beta;
  });
}

pcx_status pcx_config_set_threads(pcx_config* config, unsigned threads) {
  return Guard([&] {
    Require(config, "config is null");
    config->config.threads = threads;
    config->config.segmentation.threads = threads;
  });
}

uint64_t pcx_config_seed(const pcx_config* config) { return config ? config->config.seed : 0; }

double pcx_config_alpha_at(const pcx_config* config, double progress) {
  return config ? config->config.AlphaAt(progress) : NAN;
}

pcx_status pcx_config_loss_weights(const pcx_config* config, double* lambda, double* gamma) {
  return Guard([&] {
    Require(config && lambda && gamma, "null argument");
    *lambda = config->config.loss.lambda;
    *gamma = config->config.loss.gamma;
  });
}

pcx_status pcx_config_hash(const pcx_config* config, char out[17]) {
  return Guard([&] {
    Require(config && out, "null argument");
    const std::string h = config->config.Hash();
    std::memcpy(out, h.c_str(), 17);
  });
}

void pcx_config_destroy(pcx_config* config) { delete config; }

// ---- point clouds

pcx_status pcx_cloud_create(size_t n, const double* xyz, const uint8_t* rgb, pcx_cloud** out) {
  return Guard([&] {
    Require(out && (n == 0 || (xyz && rgb)), "null argument");
    auto c = std::make_unique<pcx_cloud>();
    c->cloud.positions.resize(n);
    c->cloud.colors.resize(n);
    for (size_t i = 0; i < n; ++i) {
      c->cloud.positions[i] = pcx::Vec3(xyz[3 * i], xyz[3 * i + 1], xyz[3 * i + 2]);
      c->cloud.colors[i] = {rgb[3 * i], rgb[3 * i + 1], rgb[3 * i + 2]};
    }
    *out = c.release();
  });
}

pcx_status pcx_cloud_set_labels(pcx_cloud* cloud, const int32_t* labels, size_t n) {
  return Guard([&] {
    Require(cloud && (n == 0 || labels), "null argument");
    if (n != cloud->cloud.size()) {
      throw pcx::Error(pcx::ErrorCode::kShapeMismatch, "one label per point is required");
    }
    cloud->cloud.labels.emplace(labels, labels + n);
  });
}

pcx_status pcx_cloud_read_ply(const char* path, pcx_cloud** out) {
  return Guard([&] {
    Require(path && out, "null argument");
    auto data = pcx::io::ReadPlyFile(path);
    *out = new pcx_cloud{std::move(data.cloud), data.layout};
  });
}

pcx_status pcx_cloud_write_ply(const pcx_cloud* cloud, const char* path,
                               const pcx_ply_layout* layout) {
  return Guard([&] {
    Require(cloud && path, "null argument");
    pcx::io::WritePly(cloud->cloud, path, layout ? ToLayout(*layout) : cloud->layout);
  });
}

pcx_status pcx_cloud_layout(const pcx_cloud* cloud, pcx_ply_layout* out) {
  return Guard([&] {
    Require(cloud && out, "null argument");
    out->encoding = cloud->layout.encoding == pcx::io::PlyEncoding::kAscii ? PCX_PLY_ASCII
                                                                           : PCX_PLY_BINARY_LE;
    out->position_type = cloud->layout.position_type == pcx::io::PositionType::kFloat64
                             ? PCX_POSITION_FLOAT64
                             : PCX_POSITION_FLOAT32;
  });
}

size_t pcx_cloud_size(const pcx_cloud* cloud) { return cloud ? cloud->cloud.size() : 0; }

pcx_status pcx_cloud_get_positions(const pcx_cloud* cloud, double* xyz, size_t n) {
  return Guard([&] {
    Require(cloud && xyz, "null argument");
    Require(n == cloud->cloud.size(), "n must equal the cloud size");
    for (size_t i = 0; i < n; ++i) {
      for (int k = 0; k < 3; ++k) xyz[3 * i + k] = cloud->cloud.positions[i][k];
    }
  });
}

pcx_status pcx_cloud_get_labels(const pcx_cloud* cloud, int32_t* labels, size_t n) {
  return Guard([&] {
    Require(cloud && labels, "null argument");
    if (!cloud->cloud.labels) throw pcx::Error(pcx::ErrorCode::kNoLabels, "cloud has no labels");
    Require(n == cloud->cloud.size(), "n must equal the cloud size");
    std::copy(cloud->cloud.labels->begin(), cloud->cloud.labels->end(), labels);
  });
}

void pcx_cloud_destroy(pcx_cloud* cloud) { delete cloud; }

// ---- matrices

pcx_status pcx_matrix_create(size_t rows, size_t cols, const double* row_major, pcx_matrix** out) {
  return Guard([&] {
    Require(out && (rows * cols == 0 || row_major), "null argument");
    auto m = std::make_unique<pcx_matrix>();
    m->m = Eigen::Map<const pcx::Matrix>(row_major, static_cast<Eigen::Index>(rows),
                                         static_cast<Eigen::Index>(cols));
    *out = m.release();
  });
}

pcx_status pcx_matrix_read(const char* path, pcx_matrix** out) {
  return Guard([&] {
    Require(path && out, "null argument");
    *out = new pcx_matrix{pcx::io::ReadFeatures(path)};
  });
}

pcx_status pcx_matrix_write(const pcx_matrix* matrix, const char* path) {
  return Guard([&] {
    Require(matrix && path, "null argument");
    pcx::io::WriteFeatures(matrix->m, path);
  });
}

size_t pcx_matrix_rows(const pcx_matrix* matrix) {
  return matrix ? static_cast<size_t>(matrix->m.rows()) : 0;
}

size_t pcx_matrix_cols(const pcx_matrix* matrix) {
  return matrix ? static_cast<size_t>(matrix->m.cols()) : 0;
}

void pcx_matrix_destroy(pcx_matrix* matrix) { delete matrix; }

// ---- segmentation

pcx_status pcx_segment(const pcx_cloud* cloud, const pcx_matrix* features, const pcx_config* config,
                       double alpha, pcx_segmentation** out) {
  return Guard([&] {
    Require(cloud && config && out, "null argument");
    pcx::SegmentationConfig sc = config->config.SegmentationAt(0.0);
    if (!std::isnan(alpha)) sc.alpha = alpha;
    *out = new pcx_segmentation{
        pcx::SegmentScene(cloud->cloud, features ? &features->m : nullptr, sc)};
  });
}

pcx_status pcx_segmentation_from_ids(const pcx_cloud* cloud, const uint32_t* ids, size_t n,
                                     pcx_segmentation** out) {
  return Guard([&] {
    Require(cloud && out && (n == 0 || ids), "null argument");
    *out = new pcx_segmentation{
        pcx::SegmentationFromLabels(cloud->cloud, std::vector<std::uint32_t>(ids, ids + n))};
  });
}

pcx_status pcx_segmentation_from_cloud(const pcx_cloud* cloud, pcx_segmentation** out) {
  return Guard([&] {
    Require(cloud && out, "null argument");
    if (!cloud->cloud.clusters) {
      throw pcx::Error(pcx::ErrorCode::kMissingRequiredProperty, "cloud has no cluster property");
    }
    std::vector<std::uint32_t> ids;
    ids.reserve(cloud->cloud.size());
    for (auto id : *cloud->cloud.clusters) {
      Require(id >= 0, "negative cluster id");
      ids.push_back(static_cast<std::uint32_t>(id));
    }
    *out = new pcx_segmentation{pcx::SegmentationFromLabels(cloud->cloud, ids)};
  });
}

pcx_status pcx_segmentation_read(const pcx_cloud* cloud, const char* path, pcx_segmentation** out) {
  return Guard([&] {
    Require(cloud && path && out, "null argument");
    *out = new pcx_segmentation{
        pcx::SegmentationFromLabels(cloud->cloud, pcx::io::ReadClusters(path))};
  });
}

pcx_status pcx_segmentation_write(const pcx_segmentation* seg, const char* path) {
  return Guard([&] {
    Require(seg && path, "null argument");
    pcx::io::WriteClusters(seg->seg.cluster_of, path);
  });
}

size_t pcx_segmentation_cluster_count(const pcx_segmentation* seg) {
  return seg ? seg->seg.num_clusters() : 0;
}

pcx_status pcx_segmentation_get_ids(const pcx_segmentation* seg, uint32_t* ids, size_t n) {
  return Guard([&] {
    Require(seg && ids, "null argument");
    Require(n == seg->seg.cluster_of.size(), "n must equal the point count");
    std::copy(seg->seg.cluster_of.begin(), seg->seg.cluster_of.end(), ids);
  });
}

pcx_status pcx_segmentation_get_box(const pcx_segmentation* seg, size_t cluster, pcx_box* out) {
  return Guard([&] {
    Require(seg && out, "null argument");
    Require(cluster < seg->seg.num_clusters(), "cluster index out of range");
    const pcx::Obb& b = seg->seg.clusters[cluster].box;
    for (int k = 0; k < 3; ++k) out->center[k] = b.center[k];
    out->yaw = b.yaw;
    out->length = b.length;
    out->width = b.width;
    out->height = b.height;
  });
}

void pcx_segmentation_destroy(pcx_segmentation* seg) { delete seg; }

// ---- masks

pcx_status pcx_mask_create(const uint8_t* flags, size_t n, pcx_mask** out) {
  return Guard([&] {
    Require(out && (n == 0 || flags), "null argument");
    auto m = std::make_unique<pcx_mask>();
    for (size_t i = 0; i < n; ++i) m->flags.push_back(flags[i] ? 1 : 0);
    *out = m.release();
  });
}

pcx_status pcx_mask_read(const char* path, pcx_mask** out) {
  return Guard([&] {
    Require(path && out, "null argument");
    *out = new pcx_mask{pcx::io::ReadMask(path)};
  });
}

pcx_status pcx_mask_write(const pcx_mask* mask, const char* path) {
  return Guard([&] {
    Require(mask && path, "null argument");
    pcx::io::WriteMask(mask->flags, path);
  });
}

size_t pcx_mask_size(const pcx_mask* mask) { return mask ? mask->flags.size() : 0; }

size_t pcx_mask_count(const pcx_mask* mask) {
  if (!mask) return 0;
  size_t n = 0;
  for (auto f : mask->flags) n += f;
  return n;
}

void pcx_mask_destroy(pcx_mask* mask) { delete mask; }

// ---- exchange

pcx_status pcx_exchange(const pcx_cloud* a, const pcx_segmentation* seg_a, const pcx_cloud* b,
                        const pcx_segmentation* seg_b, const pcx_config* config, double beta,
                        uint64_t seed, pcx_exchange_result** out) {
  return Guard([&] {
    Require(a && seg_a && b && seg_b && config && out, "null argument");
    pcx::ExchangeParams params = config->config.exchange;
    if (!std::isnan(beta)) params.beta = beta;
    const pcx::Scene sa{a->cloud, seg_a->seg};
    const pcx::Scene sb{b->cloud, seg_b->seg};
    const auto plan = pcx::PlanExchange(sa.seg, sb.seg, params, seed);
    auto [na, nb] = pcx::ExchangeObjects(sa, sb, plan);
    auto r = std::make_unique<pcx_exchange_result>();
    r->pairs = plan.pairs.size();
    r->cloud[0] = {std::move(na.cloud), a->layout};
    r->cloud[1] = {std::move(nb.cloud), b->layout};
    r->seg[0].seg = std::move(na.seg);
    r->seg[1].seg = std::move(nb.seg);
    r->mask[0].flags = std::move(na.mask);
    r->mask[1].flags = std::move(nb.mask);
    *out = r.release();
  });
}

size_t pcx_exchange_pair_count(const pcx_exchange_result* result) {
  return result ? result->pairs : 0;
}

const pcx_cloud* pcx_exchange_cloud(const pcx_exchange_result* result, int side) {
  return result && (side == 0 || side == 1) ? &result->cloud[side] : nullptr;
}

const pcx_segmentation* pcx_exchange_segmentation(const pcx_exchange_result* result, int side) {
  return result && (side == 0 || side == 1) ? &result->seg[side] : nullptr;
}

const pcx_mask* pcx_exchange_mask(const pcx_exchange_result* result, int side) {
  return result && (side == 0 || side == 1) ? &result->mask[side] : nullptr;
}

void pcx_exchange_result_destroy(pcx_exchange_result* result) { delete result; }

// ---- datasets

pcx_status pcx_dataset_load(const char* manifest_path, const pcx_config* config, pcx_dataset** out) {
  return Guard([&] {
    Require(manifest_path && config && out, "null argument");
    const auto manifest = pcx::DatasetManifest::Load(manifest_path);
    auto d = std::make_unique<pcx_dataset>();
    d->scenes = pcx::LoadDataset(manifest, config->config);
    d->replaced.assign(d->scenes.size(), 0);
    *out = d.release();
  });
}

size_t pcx_dataset_size(const pcx_dataset* dataset) { return dataset ? dataset->scenes.size() : 0; }

pcx_status pcx_dataset_corrupt(const pcx_dataset* dataset, const pcx_config* config, double delta,
                               uint64_t seed, pcx_dataset** out) {
  return Guard([&] {
    Require(dataset && config && out, "null argument");
    auto corrupted = pcx::MakeCorruptedDataset(dataset->scenes, delta, seed,
                                               config->config.exchange.limits,
                                               config->config.threads);
    auto d = std::make_unique<pcx_dataset>();
    for (auto& c : corrupted) {
      d->scenes.push_back({std::move(c.scene.cloud), std::move(c.scene.seg)});
      d->masks.push_back(std::move(c.scene.mask));
      d->replaced.push_back(c.replaced);
    }
    *out = d.release();
  });
}

size_t pcx_dataset_replaced_count(const pcx_dataset* dataset, size_t scene) {
  return dataset && scene < dataset->replaced.size() ? dataset->replaced[scene] : 0;
}

pcx_status pcx_dataset_write(const pcx_dataset* dataset, const char* out_dir,
                             const pcx_ply_layout* layout) {
  return Guard([&] {
    Require(dataset && out_dir, "null argument");
    const std::filesystem::path dir(out_dir);
    std::filesystem::create_directories(dir);
    const pcx::io::PlyLayout ply = layout ? ToLayout(*layout) : pcx::io::PlyLayout{};
    pcx::DatasetManifest manifest;
    manifest.root = ".";
    for (std::size_t s = 0; s < dataset->scenes.size(); ++s) {
      const auto& scene = dataset->scenes[s];
      const std::string id = scene.cloud.scene_id.empty() ? "scene" + std::to_string(s)
                                                          : scene.cloud.scene_id;
      pcx::ManifestEntry entry{id, id + ".ply", id + ".clusters.bin", {}};
      pcx::io::WritePly(scene.cloud, dir / entry.cloud, ply);
      pcx::io::WriteClusters(scene.seg.cluster_of, dir / entry.segmentation);
      if (s < dataset->masks.size()) pcx::io::WriteMask(dataset->masks[s], dir / (id + ".mask.bin"));
      manifest.scenes.push_back(std::move(entry));
    }
    pcx::io::WriteFileAtomic(dir / "manifest.json", manifest.ToJson());
  });
}

pcx_status pcx_dataset_write_affinity_csv(const pcx_dataset* dataset, const char* path) {
  return Guard([&] {
    Require(dataset && path, "null argument");
    std::vector<const pcx::PointCloud*> clouds;
    for (const auto& s : dataset->scenes) clouds.push_back(&s.cloud);
    const auto map = pcx::CooccurrenceAffinity(clouds);
    std::string csv = "class";
    for (auto c : map.classes) csv += "," + std::to_string(c);
    csv += "\n";
    for (std::size_t i = 0; i < map.classes.size(); ++i) {
      csv += std::to_string(map.classes[i]);
      for (std::size_t j = 0; j < map.classes.size(); ++j) {
        csv += "," + FormatDouble(map.matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
      }
      csv += "\n";
    }
    pcx::io::WriteFileAtomic(path, csv);
  });
}

void pcx_dataset_destroy(pcx_dataset* dataset) { delete dataset; }

// ---- metrics

pcx_status pcx_metrics_compute(const int32_t* pred, const int32_t* gt, size_t n, pcx_metrics** out) {
  return Guard([&] {
    Require(out && (n == 0 || (pred && gt)), "null argument");
    *out = new pcx_metrics{pcx::ComputeSegMetrics(std::vector<std::int32_t>(pred, pred + n),
                                                  std::vector<std::int32_t>(gt, gt + n))};
  });
}

pcx_status pcx_metrics_compute_files(const char* pred_path, const char* gt_path, pcx_metrics** out) {
  return Guard([&] {
    Require(pred_path && gt_path && out, "null argument");
    *out = new pcx_metrics{
        pcx::ComputeSegMetrics(pcx::io::ReadLabels(pred_path), pcx::io::ReadLabels(gt_path))};
  });
}

pcx_status pcx_metrics_read_json(const char* path, pcx_metrics** out) {
  return Guard([&] {
    Require(path && out, "null argument");
    auto m = std::make_unique<pcx_metrics>();
    try {
      const auto j = nlohmann::json::parse(pcx::io::ReadFileBytes(path));
      m->m.miou = j.at("miou").get<double>();
      m->m.acc = j.value("acc", 0.0);
      if (auto it = j.find("per_class_iou"); it != j.end()) {
        for (const auto& [k, v] : it->items()) m->m.per_class_iou[std::stoi(k)] = v.get<double>();
      }
    } catch (const nlohmann::json::exception& e) {
      throw pcx::Error(pcx::ErrorCode::kMalformedHeader, std::string("metrics JSON: ") + e.what());
    }
    *out = m.release();
  });
}

pcx_status pcx_metrics_write_json(const pcx_metrics* metrics, const char* path) {
  return Guard([&] {
    Require(metrics && path, "null argument");
    nlohmann::json per_class = nlohmann::json::object();
    for (const auto& [cls, iou] : metrics->m.per_class_iou) per_class[std::to_string(cls)] = iou;
    const nlohmann::json j = {{"miou", metrics->m.miou}, {"acc", metrics->m.acc},
                              {"per_class_iou", per_class}};
    pcx::io::WriteFileAtomic(path, j.dump(2) + "\n");
  });
}

double pcx_metrics_miou(const pcx_metrics* metrics) { return metrics ? metrics->m.miou : NAN; }
double pcx_metrics_acc(const pcx_metrics* metrics) { return metrics ? metrics->m.acc : NAN; }

pcx_status pcx_robustness_ratio(const pcx_metrics* corrupted, const pcx_metrics* clean, double* out) {
  return Guard([&] {
    Require(corrupted && clean && out, "null argument");
    *out = pcx::RobustnessRatio(corrupted->m, clean->m);
  });
}

void pcx_metrics_destroy(pcx_metrics* metrics) { delete metrics; }

// ---- losses

pcx_status pcx_bundle_create(size_t n, size_t dim, const double* features, const uint32_t* cluster_of,
                             pcx_bundle** out) {
  return Guard([&] {
    Require(out && features && cluster_of, "null argument");
    pcx::Matrix f = Eigen::Map<const pcx::Matrix>(features, static_cast<Eigen::Index>(n),
                                                  static_cast<Eigen::Index>(dim));
    *out = new pcx_bundle{
        pcx::FeatureBundle::Build(std::move(f), std::vector<std::uint32_t>(cluster_of, cluster_of + n))};
  });
}

pcx_status pcx_bundle_read(const char* path, pcx_bundle** out) {
  return Guard([&] {
    Require(path && out, "null argument");
    *out = new pcx_bundle{pcx::io::ReadBundle(path)};
  });
}

pcx_status pcx_bundle_write(const pcx_bundle* bundle, const char* path) {
  return Guard([&] {
    Require(bundle && path, "null argument");
    pcx::io::WriteBundle(bundle->b.point_features, bundle->b.cluster_of, path);
  });
}

void pcx_bundle_destroy(pcx_bundle* bundle) { delete bundle; }

pcx_status pcx_loss_compute(const pcx_bundle* const* view1, const pcx_bundle* const* view2,
                            const pcx_mask* const* masks, const pcx_matrix* const* logits,
                            size_t directions, double lambda, double gamma, pcx_loss_terms* out) {
  return Guard([&] {
    Require(view1 && view2 && masks && out, "null argument");
    double op = 0.0, context = 0.0;
    pcx::Matrix all_logits(0, 2);
    std::vector<std::uint8_t> all_mask;
    for (size_t d = 0; d < directions; ++d) {
      Require(view1[d] && view2[d] && masks[d], "null direction entry");
      const pcx::FeatureBundle& one = view1[d]->b;
      const auto& flags = masks[d]->flags;
      if (flags.size() != one.num_points()) {
        throw pcx::Error(pcx::ErrorCode::kShapeMismatch, "mask length differs from view-1 points");
      }
      pcx::LossDirection exchanged{&one, &view2[d]->b, {}};
      pcx::LossDirection remaining{&one, &view2[d]->b, {}};
      for (std::uint32_t c = 0; c < one.num_clusters(); ++c) {
        const auto& members = one.members[c];
        const bool moved = flags[members.front()] != 0;
        for (auto i : members) {
          if ((flags[i] != 0) != moved) {
            throw pcx::Error(pcx::ErrorCode::kInvalidArgument,
                             "relocation mask splits cluster " + std::to_string(c));
          }
        }
        (moved ? exchanged : remaining).pairs.push_back({c, c});
      }
      op += pcx::DirectionLoss(exchanged);
      context += pcx::DirectionLoss(remaining);
      if (logits && logits[d]) {
        const pcx::Matrix& z = logits[d]->m;
        if (static_cast<std::size_t>(z.rows()) != flags.size() || z.cols() != 2) {
          throw pcx::Error(pcx::ErrorCode::kShapeMismatch, "logits must be N x 2 for the mask");
        }
        all_logits.conservativeResize(all_logits.rows() + z.rows(), 2);
        all_logits.bottomRows(z.rows()) = z;
        all_mask.insert(all_mask.end(), flags.begin(), flags.end());
      }
    }
    out->object_pattern = op;
    out->context = context;
    out->aux = all_mask.empty() ? 0.0 : pcx::AuxLoss(all_logits, all_mask);
    out->total = pcx::TotalLoss(context, op, out->aux, {lambda, gamma});
  });
}

// ---- analysis

pcx_status pcx_overlap(const pcx_segmentation* seg, pcx_overlap_stats* out) {
  return Guard([&] {
    Require(seg && out, "null argument");
    const auto s = pcx::OverlapStatistics(seg->seg);
    out->mean_pairwise_box_iou = s.mean_pairwise_box_iou;
    out->max_pairwise_box_iou = s.max_pairwise_box_iou;
  });
}

pcx_status pcx_mix3d_merge(const pcx_cloud* a, const pcx_cloud* b, pcx_cloud** out) {
  return Guard([&] {
    Require(a && b && out, "null argument");
    *out = new pcx_cloud{pcx::Mix3dMerge(a->cloud, b->cloud), a->layout};
  });
}

pcx_status pcx_write_provenance(const char* path, const char* command, const pcx_config* config,
                                uint64_t seed, const char* params_json) {
  return Guard([&] {
    Require(path && command && config, "null argument");
    pcx::WriteProvenance(path, command, config->config, seed, params_json ? params_json : "{}");
  });
}

}  // extern "C"
