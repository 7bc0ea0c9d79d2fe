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

#ifndef COREMIL_BACKBONE_H_
#define COREMIL_BACKBONE_H_

#include <torch/torch.h>

#include "coremil/config.h"

namespace coremil {

// Two 3x3 convolutions with group normalization and an identity (or 1x1
// projection) shortcut.
class ResidualBlockImpl : public torch::nn::Module {
 public:
  ResidualBlockImpl(int in_channels, int out_channels, int stride, int groups);
  torch::Tensor forward(const torch::Tensor& x);

 private:
  torch::nn::Conv2d conv1_{nullptr}, conv2_{nullptr}, shortcut_conv_{nullptr};
  torch::nn::GroupNorm norm1_{nullptr}, norm2_{nullptr}, shortcut_norm_{nullptr};
};
TORCH_MODULE(ResidualBlock);

// ROI feature extractor: N x 1 x H x W -> N x feature_dim. Per-sample group
// normalization keeps each ROI's features independent of its batch mates.
class ResidualBackboneImpl : public torch::nn::Module {
 public:
  explicit ResidualBackboneImpl(const BackboneConfig& config);
  torch::Tensor forward(const torch::Tensor& x);

  const BackboneConfig& config() const { return config_; }
  int feature_dim() const { return config_.feature_dim; }

 private:
  BackboneConfig config_;
  torch::nn::Sequential stem_{nullptr};
  torch::nn::Sequential stages_{nullptr};
  torch::nn::Sequential expand_{nullptr};
};
TORCH_MODULE(ResidualBackbone);

// MLP projector: Linear-BatchNorm-ReLU for each hidden layer, then a plain
// Linear to the projection width.
class ProjectorImpl : public torch::nn::Module {
 public:
  ProjectorImpl(int input_dim, const ProjectorConfig& config);
  torch::Tensor forward(const torch::Tensor& x);
  int output_dim() const { return output_dim_; }

 private:
  torch::nn::Sequential layers_{nullptr};
  int output_dim_ = 0;
};
TORCH_MODULE(Projector);

// Deep copy of a module's parameters and buffers, by name.
struct ModuleState {
  std::vector<std::pair<std::string, torch::Tensor>> tensors;
  bool empty() const { return tensors.empty(); }
};

ModuleState CaptureState(const torch::nn::Module& module);
void RestoreState(torch::nn::Module& module, const ModuleState& state);

}  // namespace coremil

#endif  // COREMIL_BACKBONE_H_
