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

#ifndef COREMIL_AGGREGATOR_H_
#define COREMIL_AGGREGATOR_H_

#include <memory>
#include <vector>

#include <torch/torch.h>

namespace coremil {

struct AggregatorOutput {
  torch::Tensor logits;  // 1 x 2
  torch::Tensor pooled;  // core embedding
  // Per block, heads x n x n row-stochastic attention (transformer only).
  std::vector<torch::Tensor> attentions;
  torch::Tensor roi_weights;  // n, attention pooling weights (MIL only)
};

// Turns the n x feature_dim ROI features of one core (and their n x 2 grid
// indices) into core-level logits.
class AggregatorImpl : public torch::nn::Module {
 public:
  virtual AggregatorOutput forward(const torch::Tensor& features, const torch::Tensor& grid,
                                   bool keep_attention) = 0;
};

using Aggregator = std::shared_ptr<AggregatorImpl>;

}  // namespace coremil

#endif  // COREMIL_AGGREGATOR_H_
