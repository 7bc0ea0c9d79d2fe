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

#ifndef COREMIL_SSL_TRAINER_H_
#define COREMIL_SSL_TRAINER_H_

#include <functional>
#include <vector>

#include <torch/torch.h>

#include "coremil/backbone.h"
#include "coremil/config.h"
#include "coremil/dataset.h"
#include "coremil/linear_probe.h"

namespace coremil {

struct SslStepRecord {
  long step = 0;
  int epoch = 0;
  double lr = 0.0;
  double total = 0.0;
  double invariance = 0.0;
  double variance = 0.0;
  double covariance = 0.0;
};

struct ProbeRecord {
  int epoch = 0;
  double auroc = 0.0;
};

struct SslResult {
  std::vector<SslStepRecord> steps;
  std::vector<ProbeRecord> probes;
  int best_epoch = -1;
  double best_auroc = 0.0;
  ModuleState best_backbone;
};

struct SslOptions {
  SslSchedule schedule;
  AugmentationPolicy augment;
  VicregWeights weights;
  std::uint64_t seed = 0;
  ProbeOptions probe;
  std::function<void(const SslStepRecord&)> on_step;
  std::function<void(int epoch, const SslResult&)> on_epoch_end;
};

// Backbone features in evaluation mode, computed in chunks without gradients.
torch::Tensor ExtractFeatures(ResidualBackbone& backbone, const torch::Tensor& rois,
                              int64_t chunk = 256);

// Evenly spaced ROI indices of a bag of n (all when limit is 0 or >= n).
std::vector<int64_t> SpreadIndices(int64_t n, int limit);

// Core-level AUROC of a logistic probe fit on ROI features labelled with
// their core label; a validation core scores the mean of its ROI
// probabilities.
double ProbeCoreAuroc(ResidualBackbone& backbone, const CoreSet& train, const CoreSet& val,
                      int rois_per_core, const ProbeOptions& options = {});

// VICReg pretraining on ROIs of the training cores. Each epoch draws a pool
// of ROIs per core, shuffles it and steps through it in batches with a
// warmup-cosine learning rate per step. A linear probe runs every
// eval_every epochs and after the last one; the best probe AUROC (earliest
// epoch on ties) selects the returned backbone snapshot. Throws
// DivergenceError on a non-finite loss.
SslResult TrainSsl(ResidualBackbone backbone, Projector projector, const CoreSet& train,
                   const CoreSet& val, const SslOptions& options);

}  // namespace coremil

#endif  // COREMIL_SSL_TRAINER_H_
