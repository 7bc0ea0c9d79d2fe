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

#include "coremil/core_model.h"

#include "coremil/errors.h"

namespace coremil {

CoreModelImpl::CoreModelImpl(ResidualBackbone backbone, Aggregator aggregator)
    : backbone_(register_module("backbone", std::move(backbone))),
      aggregator_(register_module("aggregator", std::move(aggregator))) {}

AggregatorOutput CoreModelImpl::forward(const torch::Tensor& rois, const torch::Tensor& grid,
                                        bool keep_attention) {
  if (rois.size(0) != grid.size(0)) throw AlignmentError("ROIs and grid indices differ in count");
  return aggregator_->forward(backbone_(rois), grid, keep_attention);
}

torch::Tensor CoreModelImpl::ForwardBatch(const std::vector<torch::Tensor>& rois,
                                          const std::vector<torch::Tensor>& grids) {
  if (rois.empty() || rois.size() != grids.size()) {
    throw InvalidArgument("batch needs matching, nonempty ROI and grid lists");
  }
  std::vector<int64_t> counts;
  for (std::size_t i = 0; i < rois.size(); ++i) {
    if (rois[i].size(0) != grids[i].size(0)) throw AlignmentError("ROIs and grid indices differ in count");
    counts.push_back(rois[i].size(0));
  }
  const torch::Tensor features = backbone_(torch::cat(rois, 0));
  std::vector<torch::Tensor> logits;
  int64_t offset = 0;
  for (std::size_t i = 0; i < rois.size(); ++i) {
    logits.push_back(
        aggregator_->forward(features.narrow(0, offset, counts[i]), grids[i], false).logits);
    offset += counts[i];
  }
  return torch::cat(logits, 0);
}

std::vector<double> ScoreCores(CoreModel& model, const CoreSet& cores) {
  torch::NoGradGuard no_grad;
  const bool was_training = model->is_training();
  model->eval();
  std::vector<double> scores;
  scores.reserve(cores.size());
  for (const CoreSample& core : cores) {
    const torch::Tensor logits = model->forward(core.rois, core.grid).logits;
    scores.push_back(torch::softmax(logits, 1)[0][1].item<double>());
  }
  model->train(was_training);
  return scores;
}

}  // namespace coremil
