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

#ifndef COREMIL_COMMANDS_H_
#define COREMIL_COMMANDS_H_

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "coremil/baselines.h"
#include "coremil/config.h"
#include "coremil/manifest.h"
#include "coremil/metrics.h"

namespace coremil {

namespace fs = std::filesystem;

// Data directory layout: manifest.csv, cores/<id>.rf, cores/<id>.mask and,
// after preprocessing, bags/<id>.bag with bags/<id>.bag.positions.csv.

// Writes the synthetic dataset. Returns the number of cores.
int CmdSynth(const RunConfig& config, const fs::path& data_dir);

// Tiles every manifest core into a bag. Returns the number of bags.
int CmdPreprocess(const RunConfig& config, const fs::path& data_dir);

// Stage 1. Writes <out>/pretrain.pt and <out>/pretrain_log.csv.
fs::path CmdPretrain(const RunConfig& config, const fs::path& data_dir, const fs::path& out_dir);

struct TrainRequest {
  fs::path data_dir;
  fs::path out_dir;
  std::optional<fs::path> pretrain_checkpoint;  // required unless a scratch baseline
  std::optional<BaselineKind> baseline;         // unset: the transformer method
  bool resume = false;  // continue from <out>/<name>_last.pt when present
  // Stop after this many epochs in this invocation (0 = run to the end).
  int max_epochs = 0;
};

// Stage 2 (or a baseline). Writes <out>/<name>_last.pt after every epoch
// and <out>/<name>.pt with the best validation epoch. Returns the latter.
fs::path CmdTrain(const RunConfig& config, const TrainRequest& request);

struct EvaluationRecord {
  std::string checkpoint;
  std::string kind;
  std::string method;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string split;
  MetricsReport metrics;
};

// Scores the split of each checkpoint (rebuilt with that checkpoint's seed)
// and appends one JSON object per checkpoint to <out>/metrics.jsonl; writes
// <out>/summary.txt with mean and standard deviation per method.
std::vector<EvaluationRecord> CmdEvaluate(const RunConfig& config, const fs::path& data_dir,
                                          const std::vector<fs::path>& checkpoints,
                                          const std::string& split, double threshold,
                                          const fs::path& out_dir);

// Summary table grouped by method, plus Welch tests of the transformer's
// AUROC against every method with at least two runs.
std::string EvaluationSummary(const std::vector<EvaluationRecord>& records);

// Relevance CSV and PGM heatmap(s) for one core; both classes when target is
// unset. Returns the written paths.
std::vector<fs::path> CmdExplain(const RunConfig& config, const fs::path& data_dir,
                                 const fs::path& checkpoint, const std::string& core_id,
                                 std::optional<CoreLabel> target, const fs::path& out_dir);

// One row per core of the split with the pooled transformer features.
fs::path CmdExportFeatures(const RunConfig& config, const fs::path& data_dir,
                           const fs::path& checkpoint, const std::string& split,
                           const fs::path& out_csv);

// The config that produced a checkpoint: the given config with the
// checkpoint's seed. Throws ConfigMismatchError when anything else differs.
RunConfig ConfigForCheckpoint(const RunConfig& config, const fs::path& checkpoint);

// 8-bit binary PGM, values min-max scaled; the comment line keeps the range.
void WriteHeatmapPgm(const fs::path& path, const Image& heatmap, const std::string& config_hash);

}  // namespace coremil

#endif  // COREMIL_COMMANDS_H_
