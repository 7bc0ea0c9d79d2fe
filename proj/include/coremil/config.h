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

#ifndef COREMIL_CONFIG_H_
#define COREMIL_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "coremil/augment.h"
#include "coremil/phantom.h"
#include "coremil/preprocess.h"
#include "coremil/splits.h"

namespace coremil {

// Residual CNN over 1-channel ROIs. A strided stem feeds the stages (the
// first keeps resolution, later ones halve it); a 1x1 expansion to
// feature_dim precedes global average pooling.
struct BackboneConfig {
  int stem_channels = 32;
  int stem_kernel = 3;
  int stem_stride = 2;
  std::vector<int> stage_channels = {32, 64, 128, 256};
  int blocks_per_stage = 1;
  int feature_dim = 512;
  int norm_groups = 8;

  void Validate() const;
};

// MLP g: feature_dim -> widths[0] -> ... -> widths.back().
struct ProjectorConfig {
  std::vector<int> widths = {1024, 1024, 1024};

  void Validate() const;
};

struct VicregWeights {
  double lambda = 25.0;  // invariance
  double mu = 25.0;      // variance
  double nu = 1.0;       // covariance
  double gamma = 1.0;    // target standard deviation
  double epsilon = 1e-4;

  void Validate() const;
};

struct SslSchedule {
  int epochs = 200;
  int batch_size = 64;
  int warmup_epochs = 10;
  double peak_lr = 1e-4;
  double weight_decay = 0.0;
  int eval_every = 5;  // online linear evaluation cadence, in epochs
  // ROIs sampled per training core into each epoch's pool (0 = all).
  int rois_per_core = 0;
  // ROIs per core used to fit and score the online probe (0 = all).
  int probe_rois_per_core = 0;

  void Validate() const;
};

struct TransformerConfig {
  int blocks = 12;
  int heads = 8;
  int dim = 256;
  int mlp_dim = 512;
  int input_dim = 512;
  int num_classes = 2;
  double roi_dropout = 0.2;
  // Positional table covers grid_axial x grid_lateral ROI grid positions.
  int grid_axial = 24;
  int grid_lateral = 42;

  void Validate() const;
};

struct Stage2Schedule {
  int epochs = 70;
  double transformer_lr = 1e-4;
  int transformer_warmup_epochs = 5;
  double backbone_lr = 3e-5;
  int backbone_warmup_epochs = 10;
  int cores_per_batch = 8;
  double weight_decay = 0.0;

  void Validate() const;
};

// Settings of the comparison methods that the shared schedules do not cover.
struct BaselineConfig {
  int roi_batch_size = 64;
  int mil_hidden = 128;
  // Peak learning rate of a backbone trained from scratch.
  double scratch_backbone_lr = 1e-4;
};

struct RunConfig {
  std::uint64_t seed = 0;
  std::string output_dir = "runs";
  double threshold = 0.5;
  RoiSpec roi;
  PhantomConfig phantom;
  DatasetSpec dataset;
  BackboneConfig backbone;
  ProjectorConfig projector;
  AugmentationPolicy augment;
  VicregWeights vicreg;
  SslSchedule ssl;
  TransformerConfig transformer;
  Stage2Schedule stage2;
  SplitSpec split;
  SelectionPolicy selection;
  BaselineConfig baseline;

  // Copies the run seed into the dataset and split specs and checks every
  // section.
  void Finalize();

  // Canonical INI text: every key, fixed order, shortest round-trip numbers.
  std::string ToIni() const;

  // First 16 hex digits of SHA-256 over ToIni() without output_dir.
  std::string Hash() const;
};

// Defaults, then the file (if any), then "section.key=value" overrides.
// Unknown sections or keys are rejected.
RunConfig LoadRunConfig(const std::filesystem::path& file,
                        const std::vector<std::string>& overrides = {});
RunConfig ParseRunConfig(const std::string& ini_text,
                         const std::vector<std::string>& overrides = {});

}  // namespace coremil

#endif  // COREMIL_CONFIG_H_
