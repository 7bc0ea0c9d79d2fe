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

#ifndef COREMIL_BASELINES_H_
#define COREMIL_BASELINES_H_

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <torch/torch.h>

#include "coremil/backbone.h"
#include "coremil/config.h"
#include "coremil/core_model.h"
#include "coremil/dataset.h"
#include "coremil/finetune.h"

namespace coremil {

enum class BaselineKind {
  kSupervisedRoi,      // backbone + linear head from scratch, ROI-level labels
  kSslLinear,          // frozen pretrained backbone + linear head
  kSslFinetune,        // pretrained backbone fine-tuned with a linear head
  kAttentionMil,       // attention pooling over ROI features, from scratch
  kGatedAttentionMil,  // gated attention pooling, from scratch
};

std::string BaselineName(BaselineKind kind);
BaselineKind ParseBaselineKind(const std::string& name);
const std::vector<BaselineKind>& AllBaselineKinds();
bool NeedsPretrainedBackbone(BaselineKind kind);

// Backbone plus a linear head applied to every ROI independently.
class RoiClassifierImpl : public torch::nn::Module {
 public:
  explicit RoiClassifierImpl(ResidualBackbone backbone);
  torch::Tensor forward(const torch::Tensor& rois);  // n x 2 logits
  ResidualBackbone& backbone() { return backbone_; }
  torch::nn::Linear& head() { return head_; }

 private:
  ResidualBackbone backbone_;
  torch::nn::Linear head_{nullptr};
};
TORCH_MODULE(RoiClassifier);

// Mean of the ROI cancer probabilities of each core.
std::vector<double> ScoreCoresByRoiMean(RoiClassifier& model, const CoreSet& cores);

// ROI-level training: every ROI carries its core's label; batches of
// roi_batch_size ROIs drawn from a per-epoch shuffle of all training ROIs.
class RoiTrainer : public EpochTrainer {
 public:
  RoiTrainer(RoiClassifier model, const CoreSet& train, const CoreSet& val,
             const TrainerOptions& options, int roi_batch_size);

  torch::nn::Module& model() override { return *model_; }
  std::vector<double> ScoreValidation() override;

 protected:
  double TrainEpoch(int epoch) override;

 private:
  RoiClassifier model_;
  const CoreSet& train_;
  const CoreSet& val_;
  int roi_batch_size_;
};

// One comparison model; exactly one of roi / core is set.
struct BaselineModel {
  BaselineKind kind = BaselineKind::kSupervisedRoi;
  RoiClassifier roi{nullptr};
  CoreModel core{nullptr};

  torch::nn::Module& module();
  std::vector<double> Score(const CoreSet& cores);
};

// Fresh model. A pretrained backbone state is rejected by the from-scratch
// variants; the SSL variants start from it when given.
BaselineModel MakeBaselineModel(BaselineKind kind, const RunConfig& config,
                                const std::optional<ModuleState>& pretrained);

// Trainer sharing the method's epoch budget and validation-based model
// selection.
TrainerOptions BaselineTrainerOptions(BaselineKind kind, const RunConfig& config);
std::unique_ptr<EpochTrainer> MakeBaselineTrainer(BaselineModel& model, const CoreSet& train,
                                                  const CoreSet& val, const RunConfig& config);

}  // namespace coremil

#endif  // COREMIL_BASELINES_H_
