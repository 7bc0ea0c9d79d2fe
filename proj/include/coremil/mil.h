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

#ifndef COREMIL_MIL_H_
#define COREMIL_MIL_H_

#include <span>

#include <torch/torch.h>

#include "coremil/aggregator.h"

namespace coremil {

// Core cancer probability of an ROI-level classifier: the mean of its ROI
// probabilities.
double AggregateMean(std::span<const double> roi_probabilities);

// Attention pooling a = softmax(w^T tanh(V h)) over ROI features h; the gated
// form multiplies tanh(V h) elementwise by sigmoid(U h). The pooled feature
// sum_i a_i h_i feeds a linear classifier.
class AttentionMilImpl : public AggregatorImpl {
 public:
  AttentionMilImpl(int input_dim, int hidden, bool gated);
  AggregatorOutput forward(const torch::Tensor& features, const torch::Tensor& grid,
                           bool keep_attention) override;
  bool gated() const { return gated_; }

 private:
  bool gated_;
  torch::nn::Linear v_{nullptr}, u_{nullptr}, w_{nullptr}, classifier_{nullptr};
};

}  // namespace coremil

#endif  // COREMIL_MIL_H_
