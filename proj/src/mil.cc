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

#include "coremil/mil.h"

#include <algorithm>
#include <vector>

#include "coremil/errors.h"

namespace coremil {

namespace nn = torch::nn;

double AggregateMean(std::span<const double> roi_probabilities) {
  if (roi_probabilities.empty()) throw EmptyBagError("mean of an empty bag");
  // Summing in sorted order makes the result independent of ROI order.
  std::vector<double> sorted(roi_probabilities.begin(), roi_probabilities.end());
  std::sort(sorted.begin(), sorted.end());
  double sum = 0.0;
  for (double p : sorted) sum += p;
  return sum / static_cast<double>(roi_probabilities.size());
}

AttentionMilImpl::AttentionMilImpl(int input_dim, int hidden, bool gated) : gated_(gated) {
  if (input_dim < 1 || hidden < 1) throw InvalidArgument("MIL sizes must be positive");
  v_ = register_module("v", nn::Linear(nn::LinearOptions(input_dim, hidden).bias(false)));
  if (gated_) u_ = register_module("u", nn::Linear(nn::LinearOptions(input_dim, hidden).bias(false)));
  w_ = register_module("w", nn::Linear(nn::LinearOptions(hidden, 1).bias(false)));
  classifier_ = register_module("classifier", nn::Linear(input_dim, 2));
}

AggregatorOutput AttentionMilImpl::forward(const torch::Tensor& features, const torch::Tensor&,
                                           bool) {
  if (features.dim() != 2 || features.size(0) == 0) {
    throw EmptyBagError("attention MIL needs a nonempty n x d bag");
  }
  torch::Tensor gate = torch::tanh(v_(features));
  if (gated_) gate = gate * torch::sigmoid(u_(features));
  AggregatorOutput out;
  out.roi_weights = torch::softmax(w_(gate).squeeze(1), 0);
  out.pooled = out.roi_weights.matmul(features);
  out.logits = classifier_(out.pooled).unsqueeze(0);
  return out;
}

}  // namespace coremil
