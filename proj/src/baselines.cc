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

#include "coremil/baselines.h"


#include "coremil/errors.h"
#include "coremil/mil.h"
#include "coremil/rng.h"

namespace coremil {
namespace {

constexpr std::uint64_t kRoiOrderStream = 21;

struct RoiRef {
  std::size_t core;
  int64_t roi;
};

}  // namespace

std::string BaselineName(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::kSupervisedRoi: return "supervised_roi";
    case BaselineKind::kSslLinear: return "ssl_linear";
    case BaselineKind::kSslFinetune: return "ssl_finetune";
    case BaselineKind::kAttentionMil: return "attention_mil";
    case BaselineKind::kGatedAttentionMil: return "gated_attention_mil";
  }
  throw InvalidArgument("unknown baseline kind");
}

const std::vector<BaselineKind>& AllBaselineKinds() {
  static const std::vector<BaselineKind> kinds = {
      BaselineKind::kSupervisedRoi, BaselineKind::kSslLinear, BaselineKind::kSslFinetune,
      BaselineKind::kAttentionMil, BaselineKind::kGatedAttentionMil};
  return kinds;
}

BaselineKind ParseBaselineKind(const std::string& name) {
  for (BaselineKind k : AllBaselineKinds()) {
    if (BaselineName(k) == name) return k;
  }
  throw InvalidArgument("unknown baseline " + name);
}

bool NeedsPretrainedBackbone(BaselineKind kind) {
  return kind == BaselineKind::kSslLinear || kind == BaselineKind::kSslFinetune;
}

RoiClassifierImpl::RoiClassifierImpl(ResidualBackbone backbone)
    : backbone_(register_module("backbone", std::move(backbone))) {
  head_ = register_module("head", torch::nn::Linear(backbone_->feature_dim(), 2));
}

torch::Tensor RoiClassifierImpl::forward(const torch::Tensor& rois) {
  return head_(backbone_(rois));
}

std::vector<double> ScoreCoresByRoiMean(RoiClassifier& model, const CoreSet& cores) {
  torch::NoGradGuard no_grad;
  const bool was_training = model->is_training();
  model->eval();
  std::vector<double> scores;
  scores.reserve(cores.size());
  for (const CoreSample& core : cores) {
    const torch::Tensor p = torch::softmax(model(core.rois), 1).select(1, 1).to(torch::kFloat64).contiguous();
    scores.push_back(AggregateMean({p.data_ptr<double>(), static_cast<std::size_t>(p.numel())}));
  }
  model->train(was_training);
  return scores;
}

namespace {

long CountRoiBatches(const CoreSet& train, int batch) {
  int64_t n = 0;
  for (const CoreSample& c : train) n += c.size();
  return static_cast<long>((n + batch - 1) / std::max(1, batch));
}

}  // namespace

RoiTrainer::RoiTrainer(RoiClassifier model, const CoreSet& train, const CoreSet& val,
                       const TrainerOptions& options, int roi_batch_size)
    : EpochTrainer(options, CountRoiBatches(train, roi_batch_size), Labels(val)),
      model_(std::move(model)),
      train_(train),
      val_(val),
      roi_batch_size_(roi_batch_size) {
  if (roi_batch_size < 1) throw InvalidArgument("roi_batch_size must be >= 1");
  Setup(model_->head()->parameters(), model_->backbone()->parameters());
}

double RoiTrainer::TrainEpoch(int epoch) {
  std::vector<RoiRef> pool;
  for (std::size_t c = 0; c < train_.size(); ++c) {
    for (int64_t i = 0; i < train_[c].size(); ++i) pool.push_back({c, i});
  }
  Rng rng = MakeRng(options().seed, {kRoiOrderStream, static_cast<std::uint64_t>(epoch)});
  for (std::size_t i = pool.size(); i > 1; --i) {
    std::swap(pool[i - 1], pool[static_cast<std::size_t>(Uniform01(rng) * i)]);
  }
  double loss_sum = 0.0;
  long batches = 0;
  for (std::size_t start = 0; start < pool.size(); start += roi_batch_size_) {
    const std::size_t end = std::min(pool.size(), start + roi_batch_size_);
    std::vector<torch::Tensor> rois;
    std::vector<int64_t> targets;
    for (std::size_t i = start; i < end; ++i) {
      rois.push_back(train_[pool[i].core].rois[pool[i].roi]);
      targets.push_back(train_[pool[i].core].label());
    }
    const torch::Tensor loss =
        torch::nn::functional::cross_entropy(model_(torch::stack(rois, 0)), torch::tensor(targets));
    Step(loss);
    loss_sum += loss.item<double>();
    ++batches;
  }
  return loss_sum / static_cast<double>(batches);
}

std::vector<double> RoiTrainer::ScoreValidation() { return ScoreCoresByRoiMean(model_, val_); }

torch::nn::Module& BaselineModel::module() {
  if (roi) return *roi;
  if (core) return *core;
  throw InvalidArgument("baseline model is empty");
}

std::vector<double> BaselineModel::Score(const CoreSet& cores) {
  if (roi) return ScoreCoresByRoiMean(roi, cores);
  if (core) return ScoreCores(core, cores);
  throw InvalidArgument("baseline model is empty");
}

BaselineModel MakeBaselineModel(BaselineKind kind, const RunConfig& config,
                                const std::optional<ModuleState>& pretrained) {
  if (pretrained && !NeedsPretrainedBackbone(kind)) {
    throw InvalidArgument("baseline " + BaselineName(kind) + " trains its backbone from scratch");
  }
  ResidualBackbone backbone(config.backbone);
  if (pretrained) RestoreState(*backbone, *pretrained);
  BaselineModel m;
  m.kind = kind;
  switch (kind) {
    case BaselineKind::kSupervisedRoi:
    case BaselineKind::kSslLinear:
    case BaselineKind::kSslFinetune:
      m.roi = RoiClassifier(backbone);
      break;
    case BaselineKind::kAttentionMil:
    case BaselineKind::kGatedAttentionMil:
      m.core = CoreModel(backbone, std::make_shared<AttentionMilImpl>(
                                       config.backbone.feature_dim, config.baseline.mil_hidden,
                                       kind == BaselineKind::kGatedAttentionMil));
      break;
  }
  return m;
}

TrainerOptions BaselineTrainerOptions(BaselineKind kind, const RunConfig& config) {
  TrainerOptions o = TrainerOptions::FromStage2(config.stage2, config.seed);
  switch (kind) {
    case BaselineKind::kSslLinear:
      o.train_backbone = false;
      break;
    case BaselineKind::kSslFinetune:
      break;
    case BaselineKind::kSupervisedRoi:
    case BaselineKind::kAttentionMil:
    case BaselineKind::kGatedAttentionMil:
      o.backbone_lr = config.baseline.scratch_backbone_lr;
      break;
  }
  return o;
}

std::unique_ptr<EpochTrainer> MakeBaselineTrainer(BaselineModel& model, const CoreSet& train,
                                                  const CoreSet& val, const RunConfig& config) {
  const TrainerOptions options = BaselineTrainerOptions(model.kind, config);
  if (model.roi) {
    return std::make_unique<RoiTrainer>(model.roi, train, val, options,
                                        config.baseline.roi_batch_size);
  }
  return std::make_unique<CoreTrainer>(model.core, train, val, options,
                                       config.stage2.cores_per_batch, /*roi_dropout=*/0.0);
}

}  // namespace coremil
