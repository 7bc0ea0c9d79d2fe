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

// Command-line entry point: synth, preprocess, pretrain, train, evaluate,
// explain, export-features.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>
#include <torch/torch.h>

#include "coremil/commands.h"
#include "coremil/errors.h"

namespace {

using coremil::fs::path;

struct CommonOptions {
  std::string config_file;
  std::vector<std::string> overrides;
  std::string data_dir = "data";
  std::string out_dir;  // defaults to the config's output_dir

  coremil::RunConfig Load() const {
    return coremil::LoadRunConfig(config_file, overrides);
  }
  path Out(const coremil::RunConfig& config) const {
    return out_dir.empty() ? path(config.output_dir) : path(out_dir);
  }
};

void AddCommon(CLI::App* cmd, CommonOptions& opts, bool with_out = true) {
  cmd->add_option("-c,--config", opts.config_file, "INI config file");
  cmd->add_option("-s,--set", opts.overrides, "Override as section.key=value (repeatable)")
      ->allow_extra_args(false);
  cmd->add_option("-d,--data", opts.data_dir, "Dataset directory")->capture_default_str();
  if (with_out) cmd->add_option("-o,--out", opts.out_dir, "Output directory (default: output_dir)");
}

std::optional<coremil::CoreLabel> ParseTarget(const std::string& text) {
  if (text.empty()) return std::nullopt;
  return coremil::ParseLabel(text);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Core-level prostate cancer detection from micro-ultrasound RF ROIs"};
  app.require_subcommand(1);
  CommonOptions opts;

  auto* synth = app.add_subcommand("synth", "Generate a synthetic phantom dataset");
  AddCommon(synth, opts, false);

  auto* preprocess = app.add_subcommand("preprocess", "Tile every core into an ROI bag");
  AddCommon(preprocess, opts, false);

  auto* pretrain = app.add_subcommand("pretrain", "Stage 1: self-supervised backbone training");
  AddCommon(pretrain, opts);

  std::string stage1, baseline;
  bool resume = false;
  int max_epochs = 0;
  auto* train = app.add_subcommand("train", "Stage 2: core classifier (or a baseline)");
  AddCommon(train, opts);
  train->add_option("--pretrained", stage1, "Stage-1 checkpoint");
  train->add_option("--baseline", baseline,
                    "supervised_roi | ssl_linear | ssl_finetune | attention_mil | gated_attention_mil");
  train->add_flag("--resume", resume, "Continue from <name>_last.pt in the output directory");
  train->add_option("--max-epochs", max_epochs, "Stop after this many epochs (0 = all)");

  std::vector<std::string> checkpoints;
  std::string split = "test";
  std::optional<double> threshold;
  auto* evaluate = app.add_subcommand("evaluate", "Metrics of one or more checkpoints");
  AddCommon(evaluate, opts);
  evaluate->add_option("checkpoints", checkpoints, "Trained checkpoints")->required();
  evaluate->add_option("--split", split, "train | val | test")->capture_default_str();
  evaluate->add_option("--threshold", threshold, "Decision threshold (default: config)");

  std::string checkpoint, core_id, target;
  auto* explain = app.add_subcommand("explain", "ROI relevance and heatmaps for one core");
  AddCommon(explain, opts);
  explain->add_option("checkpoint", checkpoint, "Trained checkpoint")->required();
  explain->add_option("--core", core_id, "Core id")->required();
  explain->add_option("--class", target, "benign | cancer (default: both)");

  std::string features_csv;
  auto* export_features = app.add_subcommand("export-features", "Pooled core features as CSV");
  AddCommon(export_features, opts);
  export_features->add_option("checkpoint", checkpoint, "Trained checkpoint")->required();
  export_features->add_option("--split", split, "train | val | test")->capture_default_str();
  export_features->add_option("--csv", features_csv, "Output file (default: <out>/features_<split>.csv)");

  CLI11_PARSE(app, argc, argv);
  torch::set_num_threads(1);

  try {
    const coremil::RunConfig config = opts.Load();
    const path data(opts.data_dir);
    if (synth->parsed()) {
      coremil::CmdSynth(config, data);
    } else if (preprocess->parsed()) {
      coremil::CmdPreprocess(config, data);
    } else if (pretrain->parsed()) {
      coremil::CmdPretrain(config, data, opts.Out(config));
    } else if (train->parsed()) {
      coremil::TrainRequest request;
      request.data_dir = data;
      request.out_dir = opts.Out(config);
      if (!stage1.empty()) request.pretrain_checkpoint = stage1;
      if (!baseline.empty()) request.baseline = coremil::ParseBaselineKind(baseline);
      request.resume = resume;
      request.max_epochs = max_epochs;
      coremil::CmdTrain(config, request);
    } else if (evaluate->parsed()) {
      std::vector<path> paths(checkpoints.begin(), checkpoints.end());
      std::cout << coremil::EvaluationSummary(coremil::CmdEvaluate(
          config, data, paths, split, threshold.value_or(config.threshold), opts.Out(config)));
    } else if (explain->parsed()) {
      for (const path& p : coremil::CmdExplain(config, data, checkpoint, core_id,
                                               ParseTarget(target), opts.Out(config))) {
        std::cout << p.string() << "\n";
      }
    } else if (export_features->parsed()) {
      const path csv = features_csv.empty() ? opts.Out(config) / ("features_" + split + ".csv")
                                            : path(features_csv);
      std::cout << coremil::CmdExportFeatures(config, data, checkpoint, split, csv).string() << "\n";
    }
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return EXIT_FAILURE;
  }
  return EXIT_SUCCESS;
}
