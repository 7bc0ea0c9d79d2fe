/*
 * Copyright 2026 The coremil Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "coremil/commands.h"

#include <fstream>
#include <map>

#include <fmt/format.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include "coremil/backbone.h"
#include "coremil/checkpoint.h"
#include "coremil/container.h"
#include "coremil/core_model.h"
#include "coremil/dataset.h"
#include "coremil/errors.h"
#include "coremil/finetune.h"
#include "coremil/phantom.h"
#include "coremil/relevancy.h"
#include "coremil/rng.h"
#include "coremil/ssl_trainer.h"
#include "coremil/transformer.h"

namespace coremil {
namespace {

constexpr const char* kTransformerMethod = "transformer";
constexpr std::uint64_t kInitStream = 31;

Manifest LoadManifest(const fs::path& data_dir) {
  Manifest m = ReadManifestCsv(data_dir / "manifest.csv");
  ValidateManifest(m);
  return m;
}

CoreSet LoadSplit(const fs::path& data_dir, const RunConfig& config, const std::string& split) {
  const Splits splits = SplitAndSelect(LoadManifest(data_dir), config);
  const Manifest& rows = splits.Get(split);
  if (rows.empty()) throw InvalidArgument("split " + split + " is empty");
  return BuildCoreSet(rows, BagsFromDirectory(data_dir));
}

std::ofstream OpenForWrite(const fs::path& path, std::ios::openmode mode = std::ios::trunc) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, mode);
  if (!out) throw Error("cannot open for writing: " + path.string());
  return out;
}

CheckpointMeta MakeMeta(const RunConfig& config, const std::string& kind,
                        const std::string& method) {
  CheckpointMeta meta;
  meta.kind = kind;
  meta.method = method;
  meta.config_hash = config.Hash();
  meta.config_ini = config.ToIni();
  return meta;
}

CoreModel MakeTransformerModel(const RunConfig& config, ResidualBackbone backbone) {
  return CoreModel(std::move(backbone), std::make_shared<CoreTransformerImpl>(config.transformer));
}

// A trained method or baseline checkpoint, ready to score cores.
struct LoadedModel {
  CheckpointMeta meta;
  RunConfig config;
  CoreModel core{nullptr};
  RoiClassifier roi{nullptr};

  std::string label() const { return meta.method; }
  std::vector<double> Score(const CoreSet& cores) {
    return core ? ScoreCores(core, cores) : ScoreCoresByRoiMean(roi, cores);
  }
};

LoadedModel LoadTrainedModel(const RunConfig& base, const fs::path& path) {
  LoadedModel loaded;
  loaded.config = ConfigForCheckpoint(base, path);
  CheckpointReader reader(path);
  loaded.meta = reader.meta();
  if (loaded.meta.kind == "method") {
    loaded.core = MakeTransformerModel(loaded.config, ResidualBackbone(loaded.config.backbone));
    reader.LoadModule("model", *loaded.core);
  } else if (loaded.meta.kind == "baseline") {
    BaselineModel m = MakeBaselineModel(ParseBaselineKind(loaded.meta.method), loaded.config,
                                        std::nullopt);
    reader.LoadModule("model", m.module());
    loaded.core = m.core;
    loaded.roi = m.roi;
  } else {
    throw InvalidArgument(path.string() + " is a " + loaded.meta.kind +
                          " checkpoint, not a trained classifier");
  }
  return loaded;
}

const ManifestRow& FindCore(const Manifest& manifest, const std::string& core_id) {
  for (const ManifestRow& row : manifest) {
    if (row.core_id == core_id) return row;
  }
  throw InvalidArgument("no core " + core_id + " in the manifest");
}

}  // namespace

std::string EvaluationSummary(const std::vector<EvaluationRecord>& records) {
  std::map<std::string, std::vector<MetricsReport>> by_method;
  std::vector<std::string> order;
  for (const EvaluationRecord& r : records) {
    if (!by_method.contains(r.method)) order.push_back(r.method);
    by_method[r.method].push_back(r.metrics);
  }
  std::vector<std::pair<std::string, RunSummary>> rows;
  for (const std::string& method : order) {
    const auto& runs = by_method[method];
    RunSummary s;
    if (runs.size() >= 2) {
      s = SummarizeRuns(runs);
    } else {
      const MetricsReport& m = runs.front();
      s = {1, {m.auroc, 0.0}, {m.average_precision, 0.0}, {m.sensitivity, 0.0},
           {m.specificity, 0.0}};
    }
    rows.emplace_back(fmt::format("{} (n={})", method, runs.size()), s);
  }
  std::string text = SummaryTable(rows);
  // Two-tailed Welch tests of the transformer's AUROC against each other method.
  if (by_method.contains(kTransformerMethod) && by_method[kTransformerMethod].size() >= 2) {
    std::vector<double> ours;
    for (const MetricsReport& m : by_method[kTransformerMethod]) ours.push_back(m.auroc);
    for (const std::string& method : order) {
      if (method == kTransformerMethod || by_method[method].size() < 2) continue;
      std::vector<double> theirs;
      for (const MetricsReport& m : by_method[method]) theirs.push_back(m.auroc);
      const WelchResult w = WelchTTest(ours, theirs);
      text += fmt::format("AUROC {} vs {}: t = {:.4f}, df = {:.2f}, p = {:.4g}\n",
                          kTransformerMethod, method, w.t, w.df, w.p_value);
    }
  }
  return text;
}

RunConfig ConfigForCheckpoint(const RunConfig& config, const fs::path& checkpoint) {
  CheckpointReader reader(checkpoint);
  RunConfig out = config;
  out.seed = ParseRunConfig(reader.meta().config_ini).seed;
  out.Finalize();
  reader.RequireConfigHash(out.Hash());
  return out;
}

int CmdSynth(const RunConfig& config, const fs::path& data_dir) {
  const SyntheticDataset ds = GenerateDataset(config.dataset, config.phantom, config.roi);
  WriteDataset(data_dir, ds, config.Hash());
  spdlog::info("wrote {} cores to {}", ds.cores.size(), data_dir.string());
  return static_cast<int>(ds.cores.size());
}

int CmdPreprocess(const RunConfig& config, const fs::path& data_dir) {
  const Manifest manifest = LoadManifest(data_dir);
  for (const ManifestRow& row : manifest) {
    const RfImage image = ReadRfImage(data_dir / row.rf_path);
    const NeedleMask mask = ReadNeedleMask(data_dir / row.mask_path);
    RoiBag bag = BuildBag(image, mask, config.roi);
    bag.core_id = row.core_id;
    WriteRoiBag(BagPath(data_dir, row.core_id), bag, config.Hash());
  }
  spdlog::info("wrote {} bags under {}", manifest.size(), (data_dir / "bags").string());
  return static_cast<int>(manifest.size());
}

fs::path CmdPretrain(const RunConfig& config, const fs::path& data_dir, const fs::path& out_dir) {
  const Splits splits = SplitAndSelect(LoadManifest(data_dir), config);
  for (const std::string& w : splits.warnings) spdlog::warn("{}", w);
  const CoreSet train = BuildCoreSet(splits.train, BagsFromDirectory(data_dir));
  const CoreSet val = BuildCoreSet(splits.val, BagsFromDirectory(data_dir));

  torch::manual_seed(DeriveSeed(config.seed, {kInitStream, 1}));
  ResidualBackbone backbone(config.backbone);
  Projector projector(config.backbone.feature_dim, config.projector);

  const fs::path log_path = out_dir / "pretrain_log.csv";
  std::ofstream log = OpenForWrite(log_path);
  log << HeaderLine("# coremil-ssl-log v1", config.Hash()) << "\nstep,lr,total,s,v,c\n";

  SslOptions options;
  options.schedule = config.ssl;
  options.augment = config.augment;
  options.weights = config.vicreg;
  options.seed = config.seed;
  options.on_step = [&log](const SslStepRecord& r) {
    log << fmt::format("{},{},{},{},{},{}\n", r.step, r.lr, r.total, r.invariance, r.variance,
                       r.covariance);
  };
  options.on_epoch_end = [&](int epoch, const SslResult& result) {
    log.flush();
    const bool probed = !result.probes.empty() && result.probes.back().epoch == epoch;
    spdlog::info("pretrain epoch {}/{} loss {:.4f}{}", epoch + 1, config.ssl.epochs,
                 result.steps.empty() ? 0.0 : result.steps.back().total,
                 probed ? fmt::format(" probe AUROC {:.4f}", result.probes.back().auroc) : "");
  };
  const SslResult result = TrainSsl(backbone, projector, train, val, options);
  RestoreState(*backbone, result.best_backbone);

  nlohmann::json probes = nlohmann::json::array();
  for (const ProbeRecord& p : result.probes) probes.push_back({{"epoch", p.epoch}, {"auroc", p.auroc}});
  CheckpointMeta meta = MakeMeta(config, "pretrain", "vicreg");
  meta.history = {{"probes", probes},
                  {"best_epoch", result.best_epoch},
                  {"best_auroc", result.best_auroc},
                  {"epochs", config.ssl.epochs},
                  {"steps", result.steps.size()}};
  CheckpointWriter writer(meta);
  writer.AddModule("backbone", *backbone);
  writer.AddModule("projector", *projector);
  const fs::path path = out_dir / "pretrain.pt";
  writer.Save(path);
  spdlog::info("best probe AUROC {:.4f} at epoch {}; wrote {}", result.best_auroc,
               result.best_epoch + 1, path.string());
  return path;
}

fs::path CmdTrain(const RunConfig& config, const TrainRequest& request) {
  const std::string kind = request.baseline ? "baseline" : "method";
  const std::string name = request.baseline ? BaselineName(*request.baseline) : kTransformerMethod;
  const bool needs_pretrain = !request.baseline || NeedsPretrainedBackbone(*request.baseline);
  if (needs_pretrain && !request.pretrain_checkpoint) {
    throw InvalidArgument(name + " needs a stage-1 checkpoint");
  }

  const Splits splits = SplitAndSelect(LoadManifest(request.data_dir), config);
  const CoreSet train = BuildCoreSet(splits.train, BagsFromDirectory(request.data_dir));
  const CoreSet val = BuildCoreSet(splits.val, BagsFromDirectory(request.data_dir));

  std::optional<ModuleState> pretrained;
  if (needs_pretrain) {
    CheckpointReader reader(*request.pretrain_checkpoint);
    reader.RequireKind("pretrain");
    reader.RequireConfigHash(config.Hash());
    ResidualBackbone b(config.backbone);
    reader.LoadModule("backbone", *b);
    pretrained = CaptureState(*b);
  }

  torch::manual_seed(DeriveSeed(config.seed, {kInitStream, 2}));
  std::unique_ptr<EpochTrainer> trainer;
  if (request.baseline) {
    BaselineModel model = MakeBaselineModel(*request.baseline, config, pretrained);
    trainer = MakeBaselineTrainer(model, train, val, config);
  } else {
    ResidualBackbone backbone(config.backbone);
    RestoreState(*backbone, *pretrained);
    trainer = std::make_unique<CoreTrainer>(MakeTransformerModel(config, backbone), train, val,
                                            TrainerOptions::FromStage2(config.stage2, config.seed),
                                            config.stage2.cores_per_batch,
                                            config.transformer.roi_dropout);
  }

  const fs::path last = request.out_dir / (name + "_last.pt");
  if (request.resume && fs::exists(last)) {
    CheckpointReader reader(last);
    reader.RequireKind(kind);
    reader.RequireConfigHash(config.Hash());
    if (reader.meta().method != name) throw InvalidArgument(last.string() + " belongs to " + reader.meta().method);
    trainer->LoadState(reader);
    spdlog::info("resumed {} at epoch {}", name, trainer->next_epoch() + 1);
  }

  int ran = 0;
  while (!trainer->done() && (request.max_epochs <= 0 || ran < request.max_epochs)) {
    const EpochRecord r = trainer->RunEpoch();
    ++ran;
    CheckpointMeta meta = MakeMeta(config, kind, name);
    meta.history = ToJson(trainer->history());
    CheckpointWriter writer(meta);
    trainer->SaveState(writer);
    writer.Save(last);
    spdlog::info("{} epoch {}/{} loss {:.4f} val AUROC {:.4f}", name, r.epoch + 1,
                 config.stage2.epochs, r.train_loss, r.val_auroc);
  }
  if (!trainer->done()) return last;

  trainer->RestoreBest();
  CheckpointMeta meta = MakeMeta(config, kind, name);
  meta.history = ToJson(trainer->history());
  CheckpointWriter writer(meta);
  writer.AddModule("model", trainer->model());
  const fs::path best = request.out_dir / (name + ".pt");
  writer.Save(best);
  spdlog::info("{}: best val AUROC {:.4f} at epoch {}; wrote {}", name,
               trainer->history().best_val_auroc, trainer->history().best_epoch + 1,
               best.string());
  return best;
}

std::vector<EvaluationRecord> CmdEvaluate(const RunConfig& config, const fs::path& data_dir,
                                          const std::vector<fs::path>& checkpoints,
                                          const std::string& split, double threshold,
                                          const fs::path& out_dir) {
  if (checkpoints.empty()) throw InvalidArgument("no checkpoints to evaluate");
  std::vector<EvaluationRecord> records;
  std::ofstream jsonl = OpenForWrite(out_dir / "metrics.jsonl", std::ios::app);
  for (const fs::path& path : checkpoints) {
    LoadedModel model = LoadTrainedModel(config, path);
    const CoreSet cores = LoadSplit(data_dir, model.config, split);
    const std::vector<double> scores = model.Score(cores);
    EvaluationRecord rec{path.string(), model.meta.kind, model.label(), model.meta.config_hash,
                         model.config.seed, split, ComputeMetrics(scores, Labels(cores), threshold)};
    const nlohmann::json j = {{"format_version", 1},
                              {"config_hash", rec.config_hash},
                              {"checkpoint", rec.checkpoint},
                              {"kind", rec.kind},
                              {"method", rec.method},
                              {"seed", rec.seed},
                              {"split", rec.split},
                              {"threshold", rec.metrics.threshold},
                              {"n_cores", rec.metrics.n_cores},
                              {"auroc", rec.metrics.auroc},
                              {"average_precision", rec.metrics.average_precision},
                              {"sensitivity", rec.metrics.sensitivity},
                              {"specificity", rec.metrics.specificity}};
    jsonl << j.dump() << "\n";
    spdlog::info("{} [{}] {}: AUROC {:.4f} AP {:.4f} sens {:.4f} spec {:.4f}", rec.method,
                 rec.seed, split, rec.metrics.auroc, rec.metrics.average_precision,
                 rec.metrics.sensitivity, rec.metrics.specificity);
    records.push_back(std::move(rec));
  }
  std::ofstream summary = OpenForWrite(out_dir / "summary.txt");
  summary << HeaderLine("# coremil-summary v1", config.Hash()) << "\n"
          << fmt::format("# split={} threshold={}\n", split, threshold) << EvaluationSummary(records);
  return records;
}

std::vector<fs::path> CmdExplain(const RunConfig& config, const fs::path& data_dir,
                                 const fs::path& checkpoint, const std::string& core_id,
                                 std::optional<CoreLabel> target, const fs::path& out_dir) {
  LoadedModel model = LoadTrainedModel(config, checkpoint);
  if (!model.core) throw InvalidArgument("relevancy needs a core-level model");
  const Manifest manifest = LoadManifest(data_dir);
  const ManifestRow& row = FindCore(manifest, core_id);
  const CoreSample core = MakeCoreSample(row, BagsFromDirectory(data_dir)(row));
  const RfImage image = ReadRfImage(data_dir / row.rf_path);

  std::vector<CoreLabel> targets;
  if (target) {
    targets.push_back(*target);
  } else {
    targets = {CoreLabel::kBenign, CoreLabel::kCancer};
  }
  const HeatmapGeometry geometry{image.samples.rows(), image.samples.cols(), image.depth_mm,
                                 image.width_mm, model.config.roi};
  const std::string hash = model.meta.config_hash;
  std::vector<RelevancyScores> scores;
  std::vector<fs::path> written;
  for (CoreLabel t : targets) {
    scores.push_back(RoiRelevance(model.core, core, t));
    const fs::path pgm = out_dir / fmt::format("{}_{}.pgm", core_id, LabelName(t));
    WriteHeatmapPgm(pgm, MapToImage(scores.back().roi, core.positions, geometry), hash);
    written.push_back(pgm);
  }

  const fs::path csv_path = out_dir / (core_id + "_relevance.csv");
  std::ofstream csv = OpenForWrite(csv_path);
  csv << HeaderLine("# coremil-relevance v1", hash) << "\nroi_index,axial_mm,lateral_mm";
  for (CoreLabel t : targets) csv << "," << LabelName(t) << "_score";
  csv << "\n";
  for (std::size_t i = 0; i < core.positions.size(); ++i) {
    csv << fmt::format("{},{},{}", i, core.positions[i].axial_mm, core.positions[i].lateral_mm);
    for (const RelevancyScores& s : scores) csv << fmt::format(",{}", s.roi[i]);
    csv << "\n";
  }
  written.insert(written.begin(), csv_path);
  return written;
}

fs::path CmdExportFeatures(const RunConfig& config, const fs::path& data_dir,
                           const fs::path& checkpoint, const std::string& split,
                           const fs::path& out_csv) {
  LoadedModel model = LoadTrainedModel(config, checkpoint);
  if (!model.core) throw InvalidArgument("feature export needs a core-level model");
  const CoreSet cores = LoadSplit(data_dir, model.config, split);
  torch::NoGradGuard no_grad;
  model.core->eval();
  std::ofstream out = OpenForWrite(out_csv);
  out << HeaderLine("# coremil-features v1", model.meta.config_hash) << "\n";
  bool header = false;
  for (const CoreSample& core : cores) {
    const torch::Tensor pooled =
        model.core->forward(core.rois, core.grid).pooled.to(torch::kFloat64).contiguous();
    if (!header) {
      out << "core_id,label,gleason_surrogate";
      for (int64_t k = 0; k < pooled.numel(); ++k) out << ",f" << k;
      out << "\n";
      header = true;
    }
    out << fmt::format("{},{},{}", core.meta.core_id, core.label(), core.meta.gleason_surrogate);
    const double* p = pooled.data_ptr<double>();
    for (int64_t k = 0; k < pooled.numel(); ++k) out << fmt::format(",{}", p[k]);
    out << "\n";
  }
  return out_csv;
}

void WriteHeatmapPgm(const fs::path& path, const Image& heatmap, const std::string& config_hash) {
  float lo = 0.0f, hi = 0.0f;
  if (!heatmap.empty()) {
    const auto [mn, mx] = std::minmax_element(heatmap.values().begin(), heatmap.values().end());
    lo = *mn;
    hi = *mx;
  }
  std::ofstream out = OpenForWrite(path, std::ios::trunc | std::ios::binary);
  out << "P5\n"
      << HeaderLine("# coremil-heatmap v1", config_hash) << fmt::format(" min={} max={}\n", lo, hi)
      << heatmap.cols() << " " << heatmap.rows() << "\n255\n";
  const float range = hi - lo;
  for (float v : heatmap.values()) {
    const float t = range > 0 ? (v - lo) / range : 0.0f;
    out.put(static_cast<char>(static_cast<unsigned char>(std::lround(t * 255.0f))));
  }
}

}  // namespace coremil
