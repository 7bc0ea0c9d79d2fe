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

#include "coremil/relevancy.h"

#include "coremil/errors.h"

namespace coremil {

torch::Tensor ModifiedAttention(const torch::Tensor& attention, const torch::Tensor& gradient) {
  if (!gradient.defined()) throw InvalidArgument("attention map carries no gradient");
  if (attention.dim() != 3 || !attention.sizes().equals(gradient.sizes()) ||
      attention.size(1) != attention.size(2)) {
    throw InvalidArgument("attention and gradient must both be heads x n x n");
  }
  return (attention * gradient).clamp_min(0.0).mean(0);
}

RelevancyAccumulator::RelevancyAccumulator(int64_t n)
    : r_(torch::eye(n, torch::kFloat64)) {}

void RelevancyAccumulator::Add(const torch::Tensor& a_bar) {
  if (!a_bar.sizes().equals(r_.sizes())) throw InvalidArgument("relevancy size mismatch");
  r_ = r_ + a_bar.to(torch::kFloat64).matmul(r_);
}

RelevancyScores RoiRelevance(CoreModel& model, const CoreSample& core, CoreLabel target,
                             RelevancyPooling pooling) {
  if (model.is_empty()) throw InvalidArgument("relevancy needs a loaded model");
  const bool was_training = model->is_training();
  model->eval();
  model->zero_grad();
  torch::AutoGradMode grad(true);
  AggregatorOutput out = model->forward(core.rois, core.grid, /*keep_attention=*/true);
  if (out.attentions.empty()) {
    model->train(was_training);
    throw InvalidArgument("relevancy needs an aggregator with self-attention");
  }
  out.logits[0][static_cast<int>(target)].backward();

  RelevancyAccumulator acc(core.size());
  for (const torch::Tensor& a : out.attentions) {
    acc.Add(ModifiedAttention(a.detach(), a.grad()));
  }
  model->zero_grad();
  model->train(was_training);

  RelevancyScores scores;
  scores.target = target;
  scores.matrix = acc.matrix();
  const torch::Tensor residual = scores.matrix - torch::eye(core.size(), torch::kFloat64);
  const torch::Tensor pooled =
      residual.mean(pooling == RelevancyPooling::kReceivers ? 0 : 1).contiguous();
  scores.roi.assign(pooled.data_ptr<double>(), pooled.data_ptr<double>() + pooled.numel());
  return scores;
}

Image MapToImage(const std::vector<double>& scores, const std::vector<RoiPosition>& positions,
                 const HeatmapGeometry& geometry) {
  if (scores.size() != positions.size()) throw AlignmentError("scores and positions differ in count");
  if (geometry.rows < 1 || geometry.cols < 1) throw InvalidArgument("empty heatmap geometry");
  const GridShape shape = RoiGridShape(geometry.depth_mm, geometry.width_mm, geometry.roi);
  std::vector<double> sum(static_cast<std::size_t>(geometry.rows) * geometry.cols, 0.0);
  std::vector<int> count(sum.size(), 0);
  constexpr double kSlack = 1e-6;
  for (std::size_t i = 0; i < positions.size(); ++i) {
    const RoiPosition& p = positions[i];
    if (p.axial_index < 0 || p.axial_index >= shape.axial || p.lateral_index < 0 ||
        p.lateral_index >= shape.lateral || p.axial_mm < -kSlack || p.lateral_mm < -kSlack ||
        p.axial_mm + geometry.roi.roi_size_mm > geometry.depth_mm + kSlack ||
        p.lateral_mm + geometry.roi.roi_size_mm > geometry.width_mm + kSlack) {
      throw AlignmentError("ROI position lies outside the image");
    }
    const RoiWindow w = GridWindow(geometry.rows, geometry.cols, geometry.depth_mm,
                                   geometry.width_mm, geometry.roi, p.axial_index, p.lateral_index);
    for (int r = w.row0; r < w.row0 + w.rows; ++r) {
      for (int c = w.col0; c < w.col0 + w.cols; ++c) {
        const std::size_t k = static_cast<std::size_t>(r) * geometry.cols + c;
        sum[k] += scores[i];
        ++count[k];
      }
    }
  }
  Image out(geometry.rows, geometry.cols, 0.0f);
  for (int r = 0; r < geometry.rows; ++r) {
    for (int c = 0; c < geometry.cols; ++c) {
      const std::size_t k = static_cast<std::size_t>(r) * geometry.cols + c;
      if (count[k] > 0) out(r, c) = static_cast<float>(sum[k] / count[k]);
    }
  }
  return out;
}

}  // namespace coremil
