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

#ifndef COREMIL_CORE_MODEL_H_
#define COREMIL_CORE_MODEL_H_

#include <vector>

#include <torch/torch.h>

#include "coremil/aggregator.h"
#include "coremil/backbone.h"
#include "coremil/dataset.h"

namespace coremil {

// ROI backbone followed by a core-level aggregator.
class CoreModelImpl : public torch::nn::Module {
 public:
  CoreModelImpl(ResidualBackbone backbone, Aggregator aggregator);

  // One core: rois n x 1 x H x W, grid n x 2.
  AggregatorOutput forward(const torch::Tensor& rois, const torch::Tensor& grid,
                           bool keep_attention = false);

  // Several cores through one backbone pass; the aggregator then runs per
  // core. Returns k x 2 logits.
  torch::Tensor ForwardBatch(const std::vector<torch::Tensor>& rois,
                             const std::vector<torch::Tensor>& grids);

  ResidualBackbone& backbone() { return backbone_; }
  Aggregator& aggregator() { return aggregator_; }

 private:
  ResidualBackbone backbone_;
  Aggregator aggregator_;
};
TORCH_MODULE(CoreModel);

// Cancer probability of each core, in evaluation mode without gradients.
std::vector<double> ScoreCores(CoreModel& model, const CoreSet& cores);

}  // namespace coremil

#endif  // COREMIL_CORE_MODEL_H_
