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

#include "coremil/finetune.h"

#include <cmath>

#include <fmt/format.h>

#include "coremil/errors.h"
#include "coremil/metrics.h"
#include "coremil/rng.h"
#include "coremil/schedule.h"
#include "coremil/transformer.h"

namespace coremil {
namespace {

constexpr std::uint64_t kOrderStream = 11;
constexpr std::uint64_t kDropoutStream = 12;

}  // namespace

nlohmann::json ToJson(const TrainingHistory& history) {
  nlohmann::json epochs = nlohmann::json::array();
  for (const EpochRecord& r : history.epochs) {
    epochs.push_back({{"epoch", r.epoch},
                      {"train_loss", r.train_loss},
                      {"val_auroc", r.val_auroc},
                      {"head_lr", r.head_lr},
                      {"backbone_lr", r.backbone_lr}});
  }
  return {{"epochs", epochs},
          {"best_epoch", history.best_epoch},
          {"best_val_auroc", history.best_val_auroc}};
}

TrainingHistory HistoryFromJson(const nlohmann::json& j) {
  TrainingHistory h;
  for (const auto& e : j.at("epochs")) {
    h.epochs.push_back({e.at("epoch").get<int>(), e.at("train_loss").get<double>(),
                        e.at("val_auroc").get<double>(), e.at("head_lr").get<double>(),
                        e.at("backbone_lr").get<double>()});
  }
  h.best_epoch = j.at("best_epoch").get<int>();
  h.best_val_auroc = j.at("best_val_auroc").get<double>();
  return h;
}

TrainerOptions TrainerOptions::FromStage2(const Stage2Schedule& schedule, std::uint64_t seed) {
  TrainerOptions o;
  o.epochs = schedule.epochs;
  o.head_lr = schedule.transformer_lr;
  o.head_warmup_epochs = schedule.transformer_warmup_epochs;
  o.backbone_lr = schedule.backbone_lr;
  o.backbone_warmup_epochs = schedule.backbone_warmup_epochs;
  o.weight_decay = schedule.weight_decay;
  o.seed = seed;
  return o;
}

EpochTrainer::EpochTrainer(const TrainerOptions& options, long steps_per_epoch,
                           std::vector<int> val_labels)
    : options_(options), val_labels_(std::move(val_labels)), steps_per_epoch_(steps_per_epoch) {
  if (options_.epochs < 1) throw InvalidArgument("training needs at least one epoch");
  if (steps_per_epoch_ < 1) throw InvalidArgument("training set yields no batches");
  if (options_.head_lr < 0 || options_.backbone_lr < 0) {
    throw InvalidArgument("learning rates must be >= 0");
  }
}

void EpochTrainer::Setup(std::vector<torch::Tensor> head_params,
                         std::vector<torch::Tensor> backbone_params) {
  using torch::optim::AdamOptions;
  std::vector<torch::optim::OptimizerParamGroup> groups;
  groups.emplace_back(std::move(head_params),
                      std::make_unique<AdamOptions>(AdamOptions(options_.head_lr)
                                                        .weight_decay(options_.weight_decay)));
  if (options_.train_backbone && !backbone_params.empty()) {
    groups.emplace_back(std::move(backbone_params),
                        std::make_unique<AdamOptions>(AdamOptions(options_.backbone_lr)
                                                          .weight_decay(options_.weight_decay)));
    has_backbone_group_ = true;
  } else {
    for (torch::Tensor& p : backbone_params) p.set_requires_grad(false);
  }
  optimizer_ = std::make_unique<torch::optim::Adam>(std::move(groups),
                                                    AdamOptions(options_.head_lr));
}

void EpochTrainer::Step(const torch::Tensor& loss) {
  const long total = options_.epochs * steps_per_epoch_;
  const WarmupCosineSchedule head(options_.head_lr, options_.head_warmup_epochs * steps_per_epoch_,
                                  total);
  const WarmupCosineSchedule backbone(options_.backbone_lr,
                                      options_.backbone_warmup_epochs * steps_per_epoch_, total);
  head_lr_now_ = head.At(step_);
  backbone_lr_now_ = has_backbone_group_ ? backbone.At(step_) : 0.0;
  auto& groups = optimizer_->param_groups();
  static_cast<torch::optim::AdamOptions&>(groups[0].options()).lr(head_lr_now_);
  if (has_backbone_group_) {
    static_cast<torch::optim::AdamOptions&>(groups[1].options()).lr(backbone_lr_now_);
  }
  optimizer_->zero_grad();
  loss.backward();
  optimizer_->step();
  ++step_;
}

EpochRecord EpochTrainer::RunEpoch() {
  if (done()) throw InvalidArgument("training already finished");
  const int epoch = next_epoch_;
  model().train();
  const double loss = TrainEpoch(epoch);
  if (!std::isfinite(loss)) {
    throw DivergenceError(fmt::format("non-finite training loss in epoch {}", epoch));
  }
  const double auroc = Auroc(ScoreValidation(), val_labels_);
  const EpochRecord record{epoch, loss, auroc, head_lr_now_, backbone_lr_now_};
  history_.epochs.push_back(record);
  if (history_.best_epoch < 0 || auroc > history_.best_val_auroc) {
    history_.best_epoch = epoch;
    history_.best_val_auroc = auroc;
    best_state_ = CaptureState(model());
  }
  ++next_epoch_;
  return record;
}

void EpochTrainer::RunToEnd() {
  while (!done()) RunEpoch();
}

void EpochTrainer::RestoreBest() {
  if (best_state_.empty()) throw InvalidArgument("no epoch has been evaluated yet");
  RestoreState(model(), best_state_);
}

void EpochTrainer::SaveState(CheckpointWriter& writer) {
  writer.AddModule("model", model());
  writer.AddOptimizer("optimizer", *optimizer_);
  writer.AddJson("trainer", {{"next_epoch", next_epoch_},
                             {"step", step_},
                             {"history", ToJson(history_)}});
  if (!best_state_.empty()) writer.AddState("best", best_state_);
}

void EpochTrainer::LoadState(CheckpointReader& reader) {
  reader.LoadModule("model", model());
  reader.LoadOptimizer("optimizer", *optimizer_);
  const nlohmann::json t = reader.ReadJson("trainer");
  next_epoch_ = t.at("next_epoch").get<int>();
  step_ = t.at("step").get<long>();
  history_ = HistoryFromJson(t.at("history"));
  best_state_ = reader.Has("best") ? reader.ReadState("best") : ModuleState{};
}

namespace {

long CeilDiv(std::size_t n, int k) { return static_cast<long>((n + k - 1) / k); }

}  // namespace

CoreTrainer::CoreTrainer(CoreModel model, const CoreSet& train, const CoreSet& val,
                         const TrainerOptions& options, int cores_per_batch, double roi_dropout)
    : EpochTrainer(options, CeilDiv(train.size(), std::max(1, cores_per_batch)), Labels(val)),
      model_(std::move(model)),
      train_(train),
      val_(val),
      cores_per_batch_(cores_per_batch),
      roi_dropout_(roi_dropout) {
  if (cores_per_batch < 1) throw InvalidArgument("cores_per_batch must be >= 1");
  Setup(model_->aggregator()->parameters(), model_->backbone()->parameters());
}

double CoreTrainer::TrainEpoch(int epoch) {
  const TrainerOptions& opt = options();
  std::vector<std::size_t> order(train_.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng order_rng = MakeRng(opt.seed, {kOrderStream, static_cast<std::uint64_t>(epoch)});
  for (std::size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[static_cast<std::size_t>(Uniform01(order_rng) * i)]);
  }
  double loss_sum = 0.0;
  long batches = 0;
  for (std::size_t start = 0; start < order.size(); start += cores_per_batch_) {
    const std::size_t end = std::min(order.size(), start + cores_per_batch_);
    std::vector<torch::Tensor> rois, grids;
    std::vector<int64_t> targets;
    for (std::size_t i = start; i < end; ++i) {
      const CoreSample& core = train_[order[i]];
      Rng rng = MakeRng(opt.seed, {kDropoutStream, static_cast<std::uint64_t>(epoch), order[i]});
      const torch::Tensor keep = torch::tensor(RoiDropout(core.size(), roi_dropout_, rng));
      rois.push_back(core.rois.index_select(0, keep));
      grids.push_back(core.grid.index_select(0, keep));
      targets.push_back(core.label());
    }
    const torch::Tensor logits = model_->ForwardBatch(rois, grids);
    const torch::Tensor loss = torch::nn::functional::cross_entropy(logits, torch::tensor(targets));
    Step(loss);
    loss_sum += loss.item<double>();
    ++batches;
  }
  return loss_sum / static_cast<double>(batches);
}

std::vector<double> CoreTrainer::ScoreValidation() { return ScoreCores(model_, val_); }

}  // namespace coremil
