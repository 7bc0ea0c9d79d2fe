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

#ifndef COREMIL_FINETUNE_H_
#define COREMIL_FINETUNE_H_

#include <memory>
#include <vector>

#include <json.hpp>
#include <torch/torch.h>

#include "coremil/backbone.h"
#include "coremil/checkpoint.h"
#include "coremil/config.h"
#include "coremil/core_model.h"
#include "coremil/dataset.h"

namespace coremil {

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double val_auroc = 0.0;
  double head_lr = 0.0;
  double backbone_lr = 0.0;
};

struct TrainingHistory {
  std::vector<EpochRecord> epochs;
  int best_epoch = -1;
  double best_val_auroc = 0.0;
};

nlohmann::json ToJson(const TrainingHistory& history);
TrainingHistory HistoryFromJson(const nlohmann::json& j);

// Two Adam parameter groups ("head" and "backbone"), each with its own
// warmup-cosine schedule stepped per batch.
struct TrainerOptions {
  int epochs = 70;
  double head_lr = 1e-4;
  int head_warmup_epochs = 5;
  double backbone_lr = 3e-5;
  int backbone_warmup_epochs = 10;
  bool train_backbone = true;
  double weight_decay = 0.0;
  std::uint64_t seed = 0;

  static TrainerOptions FromStage2(const Stage2Schedule& schedule, std::uint64_t seed);
};

// Epoch loop with per-epoch validation AUROC and best-epoch tracking (ties
// keep the earliest epoch). Subclasses supply the batches and the scores.
class EpochTrainer {
 public:
  virtual ~EpochTrainer() = default;

  EpochRecord RunEpoch();
  void RunToEnd();
  bool done() const { return next_epoch_ >= options_.epochs; }
  int next_epoch() const { return next_epoch_; }
  const TrainingHistory& history() const { return history_; }
  const ModuleState& best_state() const { return best_state_; }
  // Restores the best epoch's weights into the model.
  void RestoreBest();

  // Model, optimizer, history and best weights, enough to resume.
  void SaveState(CheckpointWriter& writer);
  void LoadState(CheckpointReader& reader);

  virtual torch::nn::Module& model() = 0;
  // Cancer probability per validation core.
  virtual std::vector<double> ScoreValidation() = 0;

 protected:
  EpochTrainer(const TrainerOptions& options, long steps_per_epoch, std::vector<int> val_labels);
  // Builds the optimizer; call once from the subclass constructor.
  void Setup(std::vector<torch::Tensor> head_params, std::vector<torch::Tensor> backbone_params);
  // Runs one epoch of batches through Step and returns the mean loss.
  virtual double TrainEpoch(int epoch) = 0;
  // Sets the scheduled rates, backpropagates loss and applies one update.
  void Step(const torch::Tensor& loss);
  const TrainerOptions& options() const { return options_; }

 private:
  TrainerOptions options_;
  std::vector<int> val_labels_;
  long steps_per_epoch_;
  long step_ = 0;
  int next_epoch_ = 0;
  std::unique_ptr<torch::optim::Adam> optimizer_;
  bool has_backbone_group_ = false;
  double head_lr_now_ = 0.0, backbone_lr_now_ = 0.0;
  TrainingHistory history_;
  ModuleState best_state_;
};

// Core-level training of a CoreModel: batches of cores_per_batch cores, ROI
// dropout on every training bag, cross-entropy on the core label.
class CoreTrainer : public EpochTrainer {
 public:
  CoreTrainer(CoreModel model, const CoreSet& train, const CoreSet& val,
              const TrainerOptions& options, int cores_per_batch, double roi_dropout);

  torch::nn::Module& model() override { return *model_; }
  std::vector<double> ScoreValidation() override;

 protected:
  double TrainEpoch(int epoch) override;

 private:
  CoreModel model_;
  const CoreSet& train_;
  const CoreSet& val_;
  int cores_per_batch_;
  double roi_dropout_;
};

}  // namespace coremil

#endif  // COREMIL_FINETUNE_H_
