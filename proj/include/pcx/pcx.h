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

/*
 * C interface to the pcx point-cloud object-exchange library.
 *
 * All objects are opaque handles created by a pcx_*_create / _read / _load
 * call and released with the matching _destroy. Every fallible call returns a
 * pcx_status; on failure pcx_last_error() describes the problem (the message
 * is thread-local and valid until the next failing call on that thread).
 * Handles returned through a `const` accessor are borrowed and must not be
 * destroyed.
 */
#ifndef PCX_PCX_H_
#define PCX_PCX_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define PCX_API __declspec(dllexport)
#else
#define PCX_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pcx_status {
  PCX_OK = 0,
  PCX_ERR_INVALID_ARGUMENT = 1,
  PCX_ERR_CONFIG = 2,
  PCX_ERR_IO = 3,
  PCX_ERR_MALFORMED_HEADER = 4,
  PCX_ERR_UNSUPPORTED_ENCODING = 5,
  PCX_ERR_MISSING_PROPERTY = 6,
  PCX_ERR_SHAPE_MISMATCH = 7,
  PCX_ERR_MISSING_FEATURES = 8,
  PCX_ERR_COUNT_EXCEEDS_POPULATION = 9,
  PCX_ERR_PLAN_SCENE_MISMATCH = 10,
  PCX_ERR_INSUFFICIENT_PARTNERS = 11,
  PCX_ERR_EMPTY_CLUSTER = 12,
  PCX_ERR_ZERO_VECTOR = 13,
  PCX_ERR_NO_LABELS = 14,
  PCX_ERR_LENGTH_MISMATCH = 15,
  PCX_ERR_NO_VALID_POINTS = 16,
  PCX_ERR_DIVISION_BY_ZERO = 17,
  PCX_ERR_TOO_FEW_CLUSTERS = 18,
  PCX_ERR_MANIFEST = 19,
  PCX_ERR_OUT_OF_MEMORY = 20,
  PCX_ERR_INTERNAL = 21
} pcx_status;

PCX_API const char* pcx_version(void);
PCX_API const char* pcx_status_name(pcx_status status);
PCX_API const char* pcx_last_error(void);

/* ---- configuration ---------------------------------------------------- */

typedef struct pcx_config pcx_config;

PCX_API pcx_status pcx_config_default(pcx_config** out);
PCX_API pcx_status pcx_config_load(const char* path, pcx_config** out);
PCX_API pcx_status pcx_config_set_seed(pcx_config* config, uint64_t seed);
/* NaN restores the automatic rule (0.5 above 20 eligible clusters, else 1). */
PCX_API pcx_status pcx_config_set_beta(pcx_config* config, double beta);
PCX_API pcx_status pcx_config_set_threads(pcx_config* config, unsigned threads);
PCX_API uint64_t pcx_config_seed(const pcx_config* config);
PCX_API double pcx_config_alpha_at(const pcx_config* config, double progress);
PCX_API pcx_status pcx_config_loss_weights(const pcx_config* config, double* lambda, double* gamma);
/* Writes 16 hex digits plus NUL. */
PCX_API pcx_status pcx_config_hash(const pcx_config* config, char out[17]);
PCX_API void pcx_config_destroy(pcx_config* config);

/* ---- point clouds ----------------------------------------------------- */

typedef enum pcx_ply_encoding { PCX_PLY_ASCII = 0, PCX_PLY_BINARY_LE = 1 } pcx_ply_encoding;
typedef enum pcx_position_type { PCX_POSITION_FLOAT32 = 0, PCX_POSITION_FLOAT64 = 1 } pcx_position_type;

typedef struct pcx_ply_layout {
  pcx_ply_encoding encoding;
  pcx_position_type position_type;
} pcx_ply_layout;

typedef struct pcx_cloud pcx_cloud;

PCX_API pcx_status pcx_cloud_create(size_t n, const double* xyz, const uint8_t* rgb, pcx_cloud** out);
PCX_API pcx_status pcx_cloud_set_labels(pcx_cloud* cloud, const int32_t* labels, size_t n);
PCX_API pcx_status pcx_cloud_read_ply(const char* path, pcx_cloud** out);
/* layout == NULL writes with the layout the cloud was read with. */
PCX_API pcx_status pcx_cloud_write_ply(const pcx_cloud* cloud, const char* path,
                                       const pcx_ply_layout* layout);
PCX_API pcx_status pcx_cloud_layout(const pcx_cloud* cloud, pcx_ply_layout* out);
PCX_API size_t pcx_cloud_size(const pcx_cloud* cloud);
PCX_API pcx_status pcx_cloud_get_positions(const pcx_cloud* cloud, double* xyz, size_t n);
PCX_API pcx_status pcx_cloud_get_labels(const pcx_cloud* cloud, int32_t* labels, size_t n);
PCX_API void pcx_cloud_destroy(pcx_cloud* cloud);

/* ---- dense matrices (features, logits) --------------------------------- */

typedef struct pcx_matrix pcx_matrix;

PCX_API pcx_status pcx_matrix_create(size_t rows, size_t cols, const double* row_major, pcx_matrix** out);
PCX_API pcx_status pcx_matrix_read(const char* path, pcx_matrix** out);
PCX_API pcx_status pcx_matrix_write(const pcx_matrix* matrix, const char* path);
PCX_API size_t pcx_matrix_rows(const pcx_matrix* matrix);
PCX_API size_t pcx_matrix_cols(const pcx_matrix* matrix);
PCX_API void pcx_matrix_destroy(pcx_matrix* matrix);

/* ---- segmentation ------------------------------------------------------ */

typedef struct pcx_segmentation pcx_segmentation;

typedef struct pcx_box {
  double center[3];
  double yaw;
  double length, width, height;
} pcx_box;

/* alpha = NaN takes the config's schedule value at progress 0. */
PCX_API pcx_status pcx_segment(const pcx_cloud* cloud, const pcx_matrix* features,
                               const pcx_config* config, double alpha, pcx_segmentation** out);
PCX_API pcx_status pcx_segmentation_from_ids(const pcx_cloud* cloud, const uint32_t* ids, size_t n,
                                             pcx_segmentation** out);
/* Uses the cloud's per-point `cluster` property. */
PCX_API pcx_status pcx_segmentation_from_cloud(const pcx_cloud* cloud, pcx_segmentation** out);
PCX_API pcx_status pcx_segmentation_read(const pcx_cloud* cloud, const char* path,
                                         pcx_segmentation** out);
PCX_API pcx_status pcx_segmentation_write(const pcx_segmentation* seg, const char* path);
PCX_API size_t pcx_segmentation_cluster_count(const pcx_segmentation* seg);
PCX_API pcx_status pcx_segmentation_get_ids(const pcx_segmentation* seg, uint32_t* ids, size_t n);
PCX_API pcx_status pcx_segmentation_get_box(const pcx_segmentation* seg, size_t cluster, pcx_box* out);
PCX_API void pcx_segmentation_destroy(pcx_segmentation* seg);

/* ---- relocation masks -------------------------------------------------- */

typedef struct pcx_mask pcx_mask;

PCX_API pcx_status pcx_mask_create(const uint8_t* flags, size_t n, pcx_mask** out);
PCX_API pcx_status pcx_mask_read(const char* path, pcx_mask** out);
PCX_API pcx_status pcx_mask_write(const pcx_mask* mask, const char* path);
PCX_API size_t pcx_mask_size(const pcx_mask* mask);
PCX_API size_t pcx_mask_count(const pcx_mask* mask);
PCX_API void pcx_mask_destroy(pcx_mask* mask);

/* ---- object exchange --------------------------------------------------- */

typedef struct pcx_exchange_result pcx_exchange_result;

/* beta = NaN uses the config's beta (or its automatic rule). */
PCX_API pcx_status pcx_exchange(const pcx_cloud* a, const pcx_segmentation* seg_a, const pcx_cloud* b,
                                const pcx_segmentation* seg_b, const pcx_config* config, double beta,
                                uint64_t seed, pcx_exchange_result** out);
PCX_API size_t pcx_exchange_pair_count(const pcx_exchange_result* result);
/* side 0 is scene A, side 1 is scene B. Borrowed handles. */
PCX_API const pcx_cloud* pcx_exchange_cloud(const pcx_exchange_result* result, int side);
PCX_API const pcx_segmentation* pcx_exchange_segmentation(const pcx_exchange_result* result, int side);
PCX_API const pcx_mask* pcx_exchange_mask(const pcx_exchange_result* result, int side);
PCX_API void pcx_exchange_result_destroy(pcx_exchange_result* result);

/* ---- datasets ---------------------------------------------------------- */

typedef struct pcx_dataset pcx_dataset;

PCX_API pcx_status pcx_dataset_load(const char* manifest_path, const pcx_config* config,
                                    pcx_dataset** out);
PCX_API size_t pcx_dataset_size(const pcx_dataset* dataset);
/* Replaces floor(delta * eligible) clusters of every scene with size-matched
 * clusters of a seeded partner scene. */
PCX_API pcx_status pcx_dataset_corrupt(const pcx_dataset* dataset, const pcx_config* config,
                                       double delta, uint64_t seed, pcx_dataset** out);
/* Clusters replaced in `scene` of a corrupted dataset (0 for loaded ones). */
PCX_API size_t pcx_dataset_replaced_count(const pcx_dataset* dataset, size_t scene);
/* Writes <id>.ply, <id>.clusters.bin, <id>.mask.bin (corrupted datasets) and
 * manifest.json. layout == NULL writes binary little-endian float32. */
PCX_API pcx_status pcx_dataset_write(const pcx_dataset* dataset, const char* out_dir,
                                     const pcx_ply_layout* layout);
/* CSV: header row and first column hold class ids. */
PCX_API pcx_status pcx_dataset_write_affinity_csv(const pcx_dataset* dataset, const char* path);
PCX_API void pcx_dataset_destroy(pcx_dataset* dataset);

/* ---- metrics ----------------------------------------------------------- */

typedef struct pcx_metrics pcx_metrics;

PCX_API pcx_status pcx_metrics_compute(const int32_t* pred, const int32_t* gt, size_t n,
                                       pcx_metrics** out);
/* pred and gt are PCX1 int32 label containers. */
PCX_API pcx_status pcx_metrics_compute_files(const char* pred_path, const char* gt_path,
                                             pcx_metrics** out);
PCX_API pcx_status pcx_metrics_read_json(const char* path, pcx_metrics** out);
PCX_API pcx_status pcx_metrics_write_json(const pcx_metrics* metrics, const char* path);
PCX_API double pcx_metrics_miou(const pcx_metrics* metrics);
PCX_API double pcx_metrics_acc(const pcx_metrics* metrics);
/* 100 * corrupted mIoU / clean mIoU. */
PCX_API pcx_status pcx_robustness_ratio(const pcx_metrics* corrupted, const pcx_metrics* clean,
                                        double* out);
PCX_API void pcx_metrics_destroy(pcx_metrics* metrics);

/* ---- losses ------------------------------------------------------------ */

typedef struct pcx_bundle pcx_bundle;

PCX_API pcx_status pcx_bundle_create(size_t n, size_t dim, const double* features,
                                     const uint32_t* cluster_of, pcx_bundle** out);
PCX_API pcx_status pcx_bundle_read(const char* path, pcx_bundle** out);
PCX_API pcx_status pcx_bundle_write(const pcx_bundle* bundle, const char* path);
PCX_API void pcx_bundle_destroy(pcx_bundle* bundle);

typedef struct pcx_loss_terms {
  double context;
  double object_pattern;
  double aux;
  double total;
} pcx_loss_terms;

/*
 * Each direction d compares clusters of view1[d] (the exchanged view) with
 * the same cluster ids in view2[d] (the reference view). Clusters whose
 * points are flagged in masks[d] feed the object-pattern term, the rest the
 * context term. logits may be NULL or hold NULL entries; the auxiliary term
 * is the mean cross entropy over all points of directions with logits.
 */
PCX_API pcx_status pcx_loss_compute(const pcx_bundle* const* view1, const pcx_bundle* const* view2,
                                    const pcx_mask* const* masks, const pcx_matrix* const* logits,
                                    size_t directions, double lambda, double gamma,
                                    pcx_loss_terms* out);

/* ---- analysis ---------------------------------------------------------- */

typedef struct pcx_overlap_stats {
  double mean_pairwise_box_iou;
  double max_pairwise_box_iou;
} pcx_overlap_stats;

PCX_API pcx_status pcx_overlap(const pcx_segmentation* seg, pcx_overlap_stats* out);
PCX_API pcx_status pcx_mix3d_merge(const pcx_cloud* a, const pcx_cloud* b, pcx_cloud** out);

/* ---- provenance -------------------------------------------------------- */

PCX_API pcx_status pcx_write_provenance(const char* path, const char* command,
                                        const pcx_config* config, uint64_t seed,
                                        const char* params_json);

#ifdef __cplusplus
}
#endif

#endif /* PCX_PCX_H_ */
