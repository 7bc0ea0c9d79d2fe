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

#include "coremil/ssl_trainer.h"

#include <cmath>
#include <cstring>

#include <fmt/format.h>

#include "coremil/augment.h"
#include "coremil/errors.h"
#include "coremil/metrics.h"
#include "coremil/mil.h"
#include "coremil/rng.h"
#include "coremil/schedule.h"
#include "coremil/vicreg.h"

namespace coremil {
namespace {

// Stream tags for the derived RNGs.
constexpr std::uint64_t kPoolStream = 1;
constexpr std::uint64_t kShuffleStream = 2;
constexpr std::uint64_t kAugmentStream = 3;

struct RoiRef {
  std::size_t core;
  int64_t roi;
};

Image TensorToImage(const torch::Tensor& roi) {
  const torch::Tensor t = roi.reshape({roi.size(-2), roi.size(-1)}).contiguous();
  const float* p = t.data_ptr<float>();
  return Image(static_cast<int>(t.size(0)), static_cast<int>(t.size(1)),
               std::vector<float>(p, p + t.numel()));
}

std::vector<RoiRef> EpochPool(const CoreSet& train, int per_core, std::uint64_t seed, int epoch) {
  std::vector<RoiRef> pool;
  for (std::size_t c = 0; c < train.size(); ++c) {
    const int64_t n = train[c].size();
    std::vector<int64_t> idx(n);
    for (int64_t i = 0; i < n; ++i) idx[i] = i;
    const int64_t take = (per_core <= 0 || per_core >= n) ? n : per_core;
    if (take < n) {
      Rng rng = MakeRng(seed, {kPoolStream, static_cast<std::uint64_t>(epoch), c});
      for (int64_t i = 0; i < take; ++i) {
        const int64_t j = i + static_cast<int64_t>(Uniform01(rng) * static_cast<double>(n - i));
        std::swap(idx[i], idx[j]);
      }
    }
    for (int64_t i = 0; i < take; ++i) pool.push_back({c, idx[i]});
  }
  Rng rng = MakeRng(seed, {kShuffleStream, static_cast<std::uint64_t>(epoch)});
  for (std::size_t i = pool.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(Uniform01(rng) * static_cast<double>(i));
    std::swap(pool[i - 1], pool[j]);
  }
  return pool;
}

torch::Tensor StackImages(const std::vector<Image>& images) { return RoisToTensor(images); }

}  // namespace

torch::Tensor ExtractFeatures(ResidualBackbone& backbone, const torch::Tensor& rois, int64_t chunk) {
  torch::NoGradGuard no_grad;
  const bool was_training = backbone->is_training();
  backbone->eval();
  std::vector<torch::Tensor> parts;
  for (int64_t i = 0; i < rois.size(0); i += chunk) {
    parts.push_back(backbone(rois.narrow(0, i, std::min(chunk, rois.size(0) - i))));
  }
  backbone->train(was_training);
  return torch::cat(parts, 0);
}

std::vector<int64_t> SpreadIndices(int64_t n, int limit) {
  std::vector<int64_t> idx;
  if (limit <= 0 || limit >= n) {
    for (int64_t i = 0; i < n; ++i) idx.push_back(i);
    return idx;
  }
  for (int k = 0; k < limit; ++k) idx.push_back((2 * k + 1) * n / (2 * limit));
  return idx;
}

double ProbeCoreAuroc(ResidualBackbone& backbone, const CoreSet& train, const CoreSet& val,
                      int rois_per_core, const ProbeOptions& options) {
  std::vector<torch::Tensor> train_rois;
  std::vector<int> train_labels;
  for (const CoreSample& core : train) {
    const std::vector<int64_t> idx = SpreadIndices(core.size(), rois_per_core);
    train_rois.push_back(core.rois.index_select(0, torch::tensor(idx, torch::kInt64)));
    train_labels.insert(train_labels.end(), idx.size(), core.label());
  }
  const torch::Tensor train_features = ExtractFeatures(backbone, torch::cat(train_rois, 0));
  const LinearProbe probe = LinearProbe::Fit(train_features, train_labels, options);

  std::vector<double> scores;
  for (const CoreSample& core : val) {
    const std::vector<int64_t> idx = SpreadIndices(core.size(), rois_per_core);
    const torch::Tensor features =
        ExtractFeatures(backbone, core.rois.index_select(0, torch::tensor(idx, torch::kInt64)));
    scores.push_back(AggregateMean(probe.Score(features)));
  }
  return Auroc(scores, Labels(val));
}

SslResult TrainSsl(ResidualBackbone backbone, Projector projector, const CoreSet& train,
                   const CoreSet& val, const SslOptions& options) {
  const SslSchedule& sched = options.schedule;
  sched.Validate();
  options.weights.Validate();
  options.augment.Validate();
  if (train.empty()) throw InvalidArgument("pretraining needs training cores");

  // Pool size does not depend on the epoch, so the step count is known upfront.
  const std::size_t pool_size = EpochPool(train, sched.rois_per_core, options.seed, 0).size();
  const long steps_per_epoch = static_cast<long>(pool_size / sched.batch_size) +
                               (pool_size % sched.batch_size >= 2 ? 1 : 0);
  if (steps_per_epoch < 1) throw InvalidArgument("ROI pool smaller than two samples");
  const WarmupCosineSchedule lr_schedule(sched.peak_lr, sched.warmup_epochs * steps_per_epoch,
                                         sched.epochs * steps_per_epoch);

  std::vector<torch::Tensor> params = backbone->parameters();
  for (const torch::Tensor& p : projector->parameters()) params.push_back(p);
  torch::optim::Adam optimizer(
      params, torch::optim::AdamOptions(sched.peak_lr).weight_decay(sched.weight_decay));
  auto& adam_options =
      static_cast<torch::optim::AdamOptions&>(optimizer.param_groups()[0].options());

  SslResult result;
  long step = 0;
  for (int epoch = 0; epoch < sched.epochs; ++epoch) {
    backbone->train();
    projector->train();
    const std::vector<RoiRef> pool = EpochPool(train, sched.rois_per_core, options.seed, epoch);
    for (std::size_t start = 0; start + 2 <= pool.size(); start += sched.batch_size) {
      const std::size_t end = std::min(pool.size(), start + sched.batch_size);
      std::vector<Image> view_a, view_b;
      for (std::size_t i = start; i < end; ++i) {
        const RoiRef& ref = pool[i];
        Rng rng = MakeRng(options.seed, {kAugmentStream, static_cast<std::uint64_t>(epoch),
                                         ref.core, static_cast<std::uint64_t>(ref.roi)});
        auto [a, b] = Augment(TensorToImage(train[ref.core].rois[ref.roi]), options.augment, rng);
        view_a.push_back(std::move(a));
        view_b.push_back(std::move(b));
      }
      const double lr = lr_schedule.At(step);
      adam_options.lr(lr);
      optimizer.zero_grad();
      const VicregTerms terms =
          VicregLoss(projector(backbone(StackImages(view_a))),
                     projector(backbone(StackImages(view_b))), options.weights);
      SslStepRecord rec{step, epoch, lr, terms.total.item<double>(),
                        terms.invariance.item<double>(), terms.variance.item<double>(),
                        terms.covariance.item<double>()};
      if (!std::isfinite(rec.total)) {
        throw DivergenceError(fmt::format(
            "non-finite VICReg loss at epoch {} step {} (lr {:.3g}, s {}, v {}, c {})", epoch,
            step, lr, rec.invariance, rec.variance, rec.covariance));
      }
      terms.total.backward();
      optimizer.step();
      result.steps.push_back(rec);
      if (options.on_step) options.on_step(rec);
      ++step;
    }

    if ((epoch + 1) % sched.eval_every == 0 || epoch + 1 == sched.epochs) {
      const double auroc =
          ProbeCoreAuroc(backbone, train, val, sched.probe_rois_per_core, options.probe);
      result.probes.push_back({epoch, auroc});
      if (result.best_epoch < 0 || auroc > result.best_auroc) {
        result.best_epoch = epoch;
        result.best_auroc = auroc;
        result.best_backbone = CaptureState(*backbone);
      }
    }
    if (options.on_epoch_end) options.on_epoch_end(epoch, result);
  }
  return result;
}

}  // namespace coremil
