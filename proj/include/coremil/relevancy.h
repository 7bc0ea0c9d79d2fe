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

#ifndef COREMIL_RELEVANCY_H_
#define COREMIL_RELEVANCY_H_

#include <vector>

#include <torch/torch.h>

#include "coremil/core_model.h"
#include "coremil/grid.h"
#include "coremil/manifest.h"
#include "coremil/preprocess.h"

namespace coremil {

// Head-mean of the positive part of attention times its gradient:
// mean_h clamp(A_h * dA_h, min 0). Inputs are heads x n x n.
torch::Tensor ModifiedAttention(const torch::Tensor& attention, const torch::Tensor& gradient);

// R starts at the identity and accumulates R <- R + A_bar R for each block,
// in forward order.
class RelevancyAccumulator {
 public:
  explicit RelevancyAccumulator(int64_t n);
  void Add(const torch::Tensor& a_bar);
  const torch::Tensor& matrix() const { return r_; }

 private:
  torch::Tensor r_;
};

// How the n x n propagated relevancy (minus the identity) becomes one score
// per ROI. kReceivers averages over the first index, i.e. how much each ROI
// is attended to; kSenders averages over the second.
enum class RelevancyPooling { kReceivers, kSenders };

struct RelevancyScores {
  std::vector<double> roi;  // one score per ROI, bag order
  CoreLabel target = CoreLabel::kCancer;
  torch::Tensor matrix;  // propagated n x n relevancy, identity included
};

// Backpropagates the target-class logit through a transformer aggregator and
// propagates the modified attention of every block. Throws InvalidArgument
// when the model is missing or its aggregator exposes no attention.
RelevancyScores RoiRelevance(CoreModel& model, const CoreSample& core, CoreLabel target,
                             RelevancyPooling pooling = RelevancyPooling::kReceivers);

struct HeatmapGeometry {
  int rows = 0;
  int cols = 0;
  double depth_mm = 0.0;
  double width_mm = 0.0;
  RoiSpec roi;
};

// Paints every ROI score over its footprint; pixels covered by several ROIs
// take their mean, uncovered pixels 0. Throws AlignmentError when a position
// falls outside the image.
Image MapToImage(const std::vector<double>& scores, const std::vector<RoiPosition>& positions,
                 const HeatmapGeometry& geometry);

}  // namespace coremil

#endif  // COREMIL_RELEVANCY_H_
