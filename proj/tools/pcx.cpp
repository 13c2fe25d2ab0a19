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

// Command-line front end for the pcx library. Links only the C interface.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "pcx/pcx.h"

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;

struct CliFailure {
  std::string error;
  std::string message;
  int exit_code;
};

[[noreturn]] void Usage(const std::string& message) {
  throw CliFailure{"UsageError", message, kExitUsage};
}

void Check(pcx_status status) {
  if (status == PCX_OK) return;
  const bool usage = status == PCX_ERR_INVALID_ARGUMENT || status == PCX_ERR_CONFIG;
  throw CliFailure{pcx_status_name(status), pcx_last_error(), usage ? kExitUsage : kExitData};
}

template <typename T, void (*Destroy)(T*)>
struct Deleter {
  void operator()(T* p) const { Destroy(p); }
};

using Config = std::unique_ptr<pcx_config, Deleter<pcx_config, pcx_config_destroy>>;
using Cloud = std::unique_ptr<pcx_cloud, Deleter<pcx_cloud, pcx_cloud_destroy>>;
using MatrixH = std::unique_ptr<pcx_matrix, Deleter<pcx_matrix, pcx_matrix_destroy>>;
using Seg = std::unique_ptr<pcx_segmentation, Deleter<pcx_segmentation, pcx_segmentation_destroy>>;
using Mask = std::unique_ptr<pcx_mask, Deleter<pcx_mask, pcx_mask_destroy>>;
using Exchange =
    std::unique_ptr<pcx_exchange_result, Deleter<pcx_exchange_result, pcx_exchange_result_destroy>>;
using Dataset = std::unique_ptr<pcx_dataset, Deleter<pcx_dataset, pcx_dataset_destroy>>;
using Metrics = std::unique_ptr<pcx_metrics, Deleter<pcx_metrics, pcx_metrics_destroy>>;
using Bundle = std::unique_ptr<pcx_bundle, Deleter<pcx_bundle, pcx_bundle_destroy>>;

template <typename H, typename Fn>
H Make(Fn&& fn) {
  typename H::pointer raw = nullptr;
  Check(fn(&raw));
  return H(raw);
}

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
};

void AddCommon(CLI::App* app, Common& c, bool with_seed) {
  app->add_option("--config", c.config_path, "pipeline configuration (JSON)");
  app->add_option("--threads", c.threads, "worker threads (0 = PCX_THREADS or all cores)");
  if (with_seed) app->add_option("--seed", c.seed, "random seed");
}

Config LoadConfig(const Common& c) {
  Config cfg = c.config_path.empty()
                   ? Make<Config>([](pcx_config** o) { return pcx_config_default(o); })
                   : Make<Config>([&](pcx_config** o) { return pcx_config_load(c.config_path.c_str(), o); });
  if (c.seed) Check(pcx_config_set_seed(cfg.get(), *c.seed));
  if (c.threads) Check(pcx_config_set_threads(cfg.get(), *c.threads));
  return cfg;
}

Cloud ReadCloud(const std::string& path) {
  return Make<Cloud>([&](pcx_cloud** o) { return pcx_cloud_read_ply(path.c_str(), o); });
}

// Segmentation from a cluster file, else the cloud's cluster property, else
// computed with the config's alpha at progress 0.
Seg ObtainSegmentation(const pcx_cloud* cloud, const std::string& path, const pcx_config* cfg) {
  if (!path.empty()) {
    return Make<Seg>([&](pcx_segmentation** o) { return pcx_segmentation_read(cloud, path.c_str(), o); });
  }
  pcx_segmentation* raw = nullptr;
  if (pcx_segmentation_from_cloud(cloud, &raw) == PCX_OK) return Seg(raw);
  return Make<Seg>([&](pcx_segmentation** o) { return pcx_segment(cloud, nullptr, cfg, NAN, o); });
}

void Provenance(const fs::path& path, const std::string& command, const pcx_config* cfg,
                const json& params) {
  Check(pcx_write_provenance(path.string().c_str(), command.c_str(), cfg, pcx_config_seed(cfg),
                             params.dump().c_str()));
}

std::string SidecarFor(const std::string& out) { return out + ".provenance.json"; }

int RunSegment(const Common& common, const std::string& in, const std::string& features,
               std::optional<double> alpha, const std::string& out) {
  Config cfg = LoadConfig(common);
  Cloud cloud = ReadCloud(in);
  MatrixH f;
  if (!features.empty()) {
    f = Make<MatrixH>([&](pcx_matrix** o) { return pcx_matrix_read(features.c_str(), o); });
  }
  const double a = alpha ? *alpha : pcx_config_alpha_at(cfg.get(), 0.0);
  Seg seg = Make<Seg>([&](pcx_segmentation** o) { return pcx_segment(cloud.get(), f.get(), cfg.get(), a, o); });
  Check(pcx_segmentation_write(seg.get(), out.c_str()));
  Provenance(SidecarFor(out), "segment", cfg.get(),
             {{"in", in}, {"features", features}, {"alpha", a}, {"out", out}});
  std::cout << json{{"clusters", pcx_segmentation_cluster_count(seg.get())}, {"alpha", a}}.dump() << "\n";
  return 0;
}

int RunExchange(const Common& common, const std::string& a_path, const std::string& b_path,
                const std::string& seg_a_path, const std::string& seg_b_path,
                std::optional<double> beta, const std::string& out_dir) {
  Config cfg = LoadConfig(common);
  if (beta) Check(pcx_config_set_beta(cfg.get(), *beta));
  Cloud a = ReadCloud(a_path);
  Cloud b = ReadCloud(b_path);
  Seg seg_a = ObtainSegmentation(a.get(), seg_a_path, cfg.get());
  Seg seg_b = ObtainSegmentation(b.get(), seg_b_path, cfg.get());
  Exchange r = Make<Exchange>([&](pcx_exchange_result** o) {
    return pcx_exchange(a.get(), seg_a.get(), b.get(), seg_b.get(), cfg.get(), NAN,
                        pcx_config_seed(cfg.get()), o);
  });
  const fs::path dir(out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw CliFailure{"IoFailure", "cannot create " + out_dir + ": " + ec.message(), kExitData};
  const char* names[2] = {"a", "b"};
  for (int side = 0; side < 2; ++side) {
    const std::string s = names[side];
    Check(pcx_cloud_write_ply(pcx_exchange_cloud(r.get(), side), (dir / ("new_" + s + ".ply")).c_str(), nullptr));
    Check(pcx_mask_write(pcx_exchange_mask(r.get(), side), (dir / ("mask_" + s + ".bin")).c_str()));
    Check(pcx_segmentation_write(pcx_exchange_segmentation(r.get(), side),
                                 (dir / ("clusters_" + s + ".bin")).c_str()));
  }
  json params = {{"a", a_path}, {"b", b_path}, {"seg_a", seg_a_path}, {"seg_b", seg_b_path}};
  params["beta"] = beta ? json(*beta) : json(nullptr);
  Provenance(dir / "provenance.json", "exchange", cfg.get(), params);
  std::cout << json{{"pairs", pcx_exchange_pair_count(r.get())},
                    {"moved_a", pcx_mask_count(pcx_exchange_mask(r.get(), 0))},
                    {"moved_b", pcx_mask_count(pcx_exchange_mask(r.get(), 1))}}
                   .dump()
            << "\n";
  return 0;
}

int RunScannetC(const Common& common, const std::string& manifest, double delta,
                const std::string& out_dir, bool ascii) {
  Config cfg = LoadConfig(common);
  Dataset clean = Make<Dataset>([&](pcx_dataset** o) { return pcx_dataset_load(manifest.c_str(), cfg.get(), o); });
  Dataset corrupted = Make<Dataset>([&](pcx_dataset** o) {
    return pcx_dataset_corrupt(clean.get(), cfg.get(), delta, pcx_config_seed(cfg.get()), o);
  });
  const pcx_ply_layout layout{ascii ? PCX_PLY_ASCII : PCX_PLY_BINARY_LE, PCX_POSITION_FLOAT32};
  Check(pcx_dataset_write(corrupted.get(), out_dir.c_str(), &layout));
  json replaced = json::array();
  for (size_t s = 0; s < pcx_dataset_size(corrupted.get()); ++s) {
    replaced.push_back(pcx_dataset_replaced_count(corrupted.get(), s));
  }
  Provenance(fs::path(out_dir) / "provenance.json", "scannet-c", cfg.get(),
             {{"manifest", manifest}, {"delta", delta}, {"replaced", replaced}});
  std::cout << json{{"scenes", pcx_dataset_size(corrupted.get())}, {"replaced", replaced}}.dump() << "\n";
  return 0;
}

int RunAffinity(const Common& common, const std::string& manifest, const std::string& out) {
  Config cfg = LoadConfig(common);
  Dataset d = Make<Dataset>([&](pcx_dataset** o) { return pcx_dataset_load(manifest.c_str(), cfg.get(), o); });
  Check(pcx_dataset_write_affinity_csv(d.get(), out.c_str()));
  return 0;
}

int RunMetrics(const std::string& pred, const std::string& gt, const std::string& out) {
  Metrics m = Make<Metrics>([&](pcx_metrics** o) { return pcx_metrics_compute_files(pred.c_str(), gt.c_str(), o); });
  if (!out.empty()) Check(pcx_metrics_write_json(m.get(), out.c_str()));
  std::cout << json{{"miou", pcx_metrics_miou(m.get())}, {"acc", pcx_metrics_acc(m.get())}}.dump() << "\n";
  return 0;
}

int RunRatio(const std::string& corrupted, const std::string& clean) {
  Metrics c = Make<Metrics>([&](pcx_metrics** o) { return pcx_metrics_read_json(corrupted.c_str(), o); });
  Metrics k = Make<Metrics>([&](pcx_metrics** o) { return pcx_metrics_read_json(clean.c_str(), o); });
  double ratio = 0.0;
  Check(pcx_robustness_ratio(c.get(), k.get(), &ratio));
  char rounded[32];
  std::snprintf(rounded, sizeof(rounded), "%.2f", ratio);
  std::cout << json{{"ratio", ratio}, {"ratio_2dp", rounded}}.dump() << "\n";
  return 0;
}

void WriteTextAtomic(const std::string& path, const std::string& text) {
  const std::string tmp = path + ".tmp";
  std::FILE* f = std::fopen(tmp.c_str(), "wb");
  bool ok = f && std::fwrite(text.data(), 1, text.size(), f) == text.size();
  if (f) ok = (std::fclose(f) == 0) && ok;
  std::error_code ec;
  if (ok) fs::rename(tmp, path, ec);
  if (!ok || ec) {
    fs::remove(tmp, ec);
    throw CliFailure{"IoFailure", "cannot write " + path, kExitData};
  }
}

std::pair<double, double> ParseWeights(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) Usage("--weights expects LAMBDA,GAMMA");
  try {
    std::size_t used = 0;
    const std::string l = text.substr(0, comma), g = text.substr(comma + 1);
    const double lambda = std::stod(l, &used);
    if (used != l.size()) Usage("--weights expects LAMBDA,GAMMA");
    const double gamma = std::stod(g, &used);
    if (used != g.size()) Usage("--weights expects LAMBDA,GAMMA");
    return {lambda, gamma};
  } catch (const std::logic_error&) {
    Usage("--weights expects LAMBDA,GAMMA");
  }
}

int RunLoss(const Common& common, const std::vector<std::string>& bundles_a,
            const std::vector<std::string>& bundles_b, const std::vector<std::string>& masks,
            const std::vector<std::string>& logits, const std::string& weights,
            const std::string& out) {
  if (bundles_a.size() != bundles_b.size() || bundles_a.size() != masks.size() || bundles_a.empty()) {
    Usage("--bundle-a, --bundle-b and --masks must be given the same number of times");
  }
  if (!logits.empty() && logits.size() != bundles_a.size()) {
    Usage("--logits must be given once per direction when used");
  }
  Config cfg = LoadConfig(common);
  double lambda = 0.0, gamma = 0.0;
  Check(pcx_config_loss_weights(cfg.get(), &lambda, &gamma));
  if (!weights.empty()) std::tie(lambda, gamma) = ParseWeights(weights);

  std::vector<Bundle> v1, v2;
  std::vector<Mask> mk;
  std::vector<MatrixH> lg;
  for (std::size_t d = 0; d < bundles_a.size(); ++d) {
    v1.push_back(Make<Bundle>([&](pcx_bundle** o) { return pcx_bundle_read(bundles_a[d].c_str(), o); }));
    v2.push_back(Make<Bundle>([&](pcx_bundle** o) { return pcx_bundle_read(bundles_b[d].c_str(), o); }));
    mk.push_back(Make<Mask>([&](pcx_mask** o) { return pcx_mask_read(masks[d].c_str(), o); }));
    if (!logits.empty()) {
      lg.push_back(Make<MatrixH>([&](pcx_matrix** o) { return pcx_matrix_read(logits[d].c_str(), o); }));
    }
  }
  std::vector<const pcx_bundle*> p1, p2;
  std::vector<const pcx_mask*> pm;
  std::vector<const pcx_matrix*> pl;
  for (std::size_t d = 0; d < v1.size(); ++d) {
    p1.push_back(v1[d].get());
    p2.push_back(v2[d].get());
    pm.push_back(mk[d].get());
    if (!lg.empty()) pl.push_back(lg[d].get());
  }
  pcx_loss_terms t{};
  Check(pcx_loss_compute(p1.data(), p2.data(), pm.data(), pl.empty() ? nullptr : pl.data(), p1.size(),
                         lambda, gamma, &t));
  const json result = {{"context", t.context}, {"object_pattern", t.object_pattern}, {"aux", t.aux},
                       {"total", t.total}, {"lambda", lambda}, {"gamma", gamma}};
  if (!out.empty()) {
    WriteTextAtomic(out, result.dump(2) + "\n");
  }
  std::cout << result.dump() << "\n";
  return 0;
}

int RunOverlap(const Common& common, const std::string& in, const std::string& seg_path) {
  Config cfg = LoadConfig(common);
  Cloud cloud = ReadCloud(in);
  Seg seg = ObtainSegmentation(cloud.get(), seg_path, cfg.get());
  pcx_overlap_stats s{};
  Check(pcx_overlap(seg.get(), &s));
  std::cout << json{{"clusters", pcx_segmentation_cluster_count(seg.get())},
                    {"mean_pairwise_box_iou", s.mean_pairwise_box_iou},
                    {"max_pairwise_box_iou", s.max_pairwise_box_iou}}
                   .dump()
            << "\n";
  return 0;
}

int RunMix3d(const std::string& a_path, const std::string& b_path, const std::string& out) {
  Cloud a = ReadCloud(a_path);
  Cloud b = ReadCloud(b_path);
  Cloud merged = Make<Cloud>([&](pcx_cloud** o) { return pcx_mix3d_merge(a.get(), b.get(), o); });
  Check(pcx_cloud_write_ply(merged.get(), out.c_str(), nullptr));
  std::cout << json{{"points", pcx_cloud_size(merged.get())}}.dump() << "\n";
  return 0;
}

void ReportError(const std::string& command, const CliFailure& f) {
  std::cerr << json{{"error", f.error}, {"message", f.message}, {"command", command},
                    {"exit_code", f.exit_code}}
                   .dump()
            << std::endl;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pcx: object-exchange point-cloud pipeline"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(pcx_version()));

  Common common;

  auto* segment = app.add_subcommand("segment", "over-segment a scene into clusters");
  std::string seg_in, seg_features, seg_out;
  std::optional<double> seg_alpha;
  segment->add_option("--in", seg_in, "input PLY")->required();
  segment->add_option("--features", seg_features, "PCX1 feature matrix (N x d)");
  segment->add_option("--alpha", seg_alpha, "feature weight (default: schedule at progress 0)");
  segment->add_option("--out", seg_out, "output cluster file")->required();
  AddCommon(segment, common, false);

  auto* exchange = app.add_subcommand("exchange", "swap matched objects between two scenes");
  std::string ex_a, ex_b, ex_seg_a, ex_seg_b, ex_out;
  std::optional<double> ex_beta;
  exchange->add_option("--a", ex_a, "scene A PLY")->required();
  exchange->add_option("--b", ex_b, "scene B PLY")->required();
  exchange->add_option("--seg-a", ex_seg_a, "scene A cluster file");
  exchange->add_option("--seg-b", ex_seg_b, "scene B cluster file");
  exchange->add_option("--beta", ex_beta, "exchange proportion (default: automatic)");
  exchange->add_option("--out-dir", ex_out, "output directory")->required();
  AddCommon(exchange, common, true);

  auto* scannet_c = app.add_subcommand("scannet-c", "build a corrupted copy of a dataset");
  std::string sc_manifest, sc_out;
  double sc_delta = 0.0;
  bool sc_ascii = false;
  scannet_c->add_option("--manifest", sc_manifest, "dataset manifest")->required();
  scannet_c->add_option("--delta", sc_delta, "fraction of eligible clusters to replace")->required();
  scannet_c->add_option("--out-dir", sc_out, "output directory")->required();
  scannet_c->add_flag("--ascii", sc_ascii, "write ASCII PLY");
  AddCommon(scannet_c, common, true);

  auto* affinity = app.add_subcommand("affinity", "class co-occurrence affinity matrix");
  std::string af_manifest, af_out;
  affinity->add_option("--manifest", af_manifest, "dataset manifest")->required();
  affinity->add_option("--out", af_out, "output CSV")->required();
  AddCommon(affinity, common, false);

  auto* metrics = app.add_subcommand("metrics", "mIoU and accuracy of predicted labels");
  std::string mt_pred, mt_gt, mt_out;
  metrics->add_option("--pred", mt_pred, "predicted labels (PCX1)")->required();
  metrics->add_option("--gt", mt_gt, "ground-truth labels (PCX1)")->required();
  metrics->add_option("--out", mt_out, "output JSON");

  auto* ratio = app.add_subcommand("ratio", "robustness ratio of two metrics files");
  std::string rt_corrupted, rt_clean;
  ratio->add_option("--corrupted", rt_corrupted, "metrics JSON on corrupted data")->required();
  ratio->add_option("--clean", rt_clean, "metrics JSON on clean data")->required();

  auto* loss = app.add_subcommand("loss", "evaluate the training objective on exported features");
  std::vector<std::string> ls_a, ls_b, ls_masks, ls_logits;
  std::string ls_weights, ls_out;
  loss->add_option("--bundle-a", ls_a, "view-1 feature bundle, one per direction")->required();
  loss->add_option("--bundle-b", ls_b, "view-2 feature bundle, one per direction")->required();
  loss->add_option("--masks", ls_masks, "relocation mask of view 1, one per direction")->required();
  loss->add_option("--logits", ls_logits, "N x 2 logits for the auxiliary term");
  loss->add_option("--weights", ls_weights, "LAMBDA,GAMMA");
  loss->add_option("--out", ls_out, "output JSON");
  AddCommon(loss, common, false);

  auto* overlap = app.add_subcommand("overlap", "pairwise box overlap of a segmented scene");
  std::string ov_in, ov_seg;
  overlap->add_option("--in", ov_in, "input PLY")->required();
  overlap->add_option("--seg", ov_seg, "cluster file");
  AddCommon(overlap, common, false);

  auto* mix3d = app.add_subcommand("mix3d", "concatenate two centred scenes");
  std::string mx_a, mx_b, mx_out;
  mix3d->add_option("--a", mx_a, "scene A PLY")->required();
  mix3d->add_option("--b", mx_b, "scene B PLY")->required();
  mix3d->add_option("--out", mx_out, "output PLY")->required();

  std::string command = "pcx";
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    ReportError(command, {"UsageError", e.what(), kExitUsage});
    return kExitUsage;
  }

  try {
    if (*segment) {
      command = "segment";
      return RunSegment(common, seg_in, seg_features, seg_alpha, seg_out);
    }
    if (*exchange) {
      command = "exchange";
      return RunExchange(common, ex_a, ex_b, ex_seg_a, ex_seg_b, ex_beta, ex_out);
    }
    if (*scannet_c) {
      command = "scannet-c";
      return RunScannetC(common, sc_manifest, sc_delta, sc_out, sc_ascii);
    }
    if (*affinity) {
      command = "affinity";
      return RunAffinity(common, af_manifest, af_out);
    }
    if (*metrics) {
      command = "metrics";
      return RunMetrics(mt_pred, mt_gt, mt_out);
    }
    if (*ratio) {
      command = "ratio";
      return RunRatio(rt_corrupted, rt_clean);
    }
    if (*loss) {
      command = "loss";
      return RunLoss(common, ls_a, ls_b, ls_masks, ls_logits, ls_weights, ls_out);
    }
    if (*overlap) {
      command = "overlap";
      return RunOverlap(common, ov_in, ov_seg);
    }
    if (*mix3d) {
      command = "mix3d";
      return RunMix3d(mx_a, mx_b, mx_out);
    }
  } catch (const CliFailure& f) {
    ReportError(command, f);
    return f.exit_code;
  } catch (const std::exception& e) {
    ReportError(command, {"Internal", e.what(), kExitData});
    return kExitData;
  }
  return kExitUsage;
}
