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

#include "coremil/backbone.h"

#include "coremil/errors.h"

namespace coremil {

namespace nn = torch::nn;

ResidualBlockImpl::ResidualBlockImpl(int in_channels, int out_channels, int stride, int groups) {
  conv1_ = register_module(
      "conv1", nn::Conv2d(nn::Conv2dOptions(in_channels, out_channels, 3).stride(stride).padding(1).bias(false)));
  norm1_ = register_module("norm1", nn::GroupNorm(nn::GroupNormOptions(groups, out_channels)));
  conv2_ = register_module(
      "conv2", nn::Conv2d(nn::Conv2dOptions(out_channels, out_channels, 3).padding(1).bias(false)));
  norm2_ = register_module("norm2", nn::GroupNorm(nn::GroupNormOptions(groups, out_channels)));
  if (stride != 1 || in_channels != out_channels) {
    shortcut_conv_ = register_module(
        "shortcut_conv",
        nn::Conv2d(nn::Conv2dOptions(in_channels, out_channels, 1).stride(stride).bias(false)));
    shortcut_norm_ =
        register_module("shortcut_norm", nn::GroupNorm(nn::GroupNormOptions(groups, out_channels)));
  }
}

torch::Tensor ResidualBlockImpl::forward(const torch::Tensor& x) {
  torch::Tensor y = torch::relu(norm1_(conv1_(x)));
  y = norm2_(conv2_(y));
  const torch::Tensor skip = shortcut_conv_ ? shortcut_norm_(shortcut_conv_(x)) : x;
  return torch::relu(y + skip);
}

ResidualBackboneImpl::ResidualBackboneImpl(const BackboneConfig& config) : config_(config) {
  config_.Validate();
  const int g = config_.norm_groups;
  stem_ = register_module(
      "stem", nn::Sequential(nn::Conv2d(nn::Conv2dOptions(1, config_.stem_channels,
                                                          config_.stem_kernel)
                                            .stride(config_.stem_stride)
                                            .padding((config_.stem_kernel - config_.stem_stride + 1) / 2)
                                            .bias(false)),
                             nn::GroupNorm(nn::GroupNormOptions(g, config_.stem_channels)),
                             nn::ReLU()));
  stages_ = register_module("stages", nn::Sequential());
  int channels = config_.stem_channels;
  for (std::size_t s = 0; s < config_.stage_channels.size(); ++s) {
    const int out = config_.stage_channels[s];
    for (int b = 0; b < config_.blocks_per_stage; ++b) {
      const int stride = (s > 0 && b == 0) ? 2 : 1;
      stages_->push_back(ResidualBlock(channels, out, stride, g));
      channels = out;
    }
  }
  expand_ = register_module(
      "expand",
      nn::Sequential(nn::Conv2d(nn::Conv2dOptions(channels, config_.feature_dim, 1).bias(false)),
                     nn::GroupNorm(nn::GroupNormOptions(g, config_.feature_dim)), nn::ReLU()));
}

torch::Tensor ResidualBackboneImpl::forward(const torch::Tensor& x) {
  if (x.dim() != 4 || x.size(1) != 1) {
    throw InvalidArgument("backbone expects an N x 1 x H x W batch");
  }
  torch::Tensor y = expand_->forward(stages_->forward(stem_->forward(x)));
  return y.mean({2, 3});
}

ProjectorImpl::ProjectorImpl(int input_dim, const ProjectorConfig& config) {
  config.Validate();
  layers_ = register_module("layers", nn::Sequential());
  int in = input_dim;
  for (std::size_t i = 0; i + 1 < config.widths.size(); ++i) {
    layers_->push_back(nn::Linear(in, config.widths[i]));
    layers_->push_back(nn::BatchNorm1d(config.widths[i]));
    layers_->push_back(nn::ReLU());
    in = config.widths[i];
  }
  layers_->push_back(nn::Linear(in, config.widths.back()));
  output_dim_ = config.widths.back();
}

torch::Tensor ProjectorImpl::forward(const torch::Tensor& x) { return layers_->forward(x); }

ModuleState CaptureState(const torch::nn::Module& module) {
  torch::NoGradGuard no_grad;
  ModuleState state;
  for (const auto& item : module.named_parameters(/*recurse=*/true)) {
    state.tensors.emplace_back(item.key(), item.value().detach().clone());
  }
  for (const auto& item : module.named_buffers(/*recurse=*/true)) {
    state.tensors.emplace_back("buffer:" + item.key(), item.value().detach().clone());
  }
  return state;
}

void RestoreState(torch::nn::Module& module, const ModuleState& state) {
  torch::NoGradGuard no_grad;
  auto params = module.named_parameters(/*recurse=*/true);
  auto buffers = module.named_buffers(/*recurse=*/true);
  for (const auto& [name, tensor] : state.tensors) {
    torch::Tensor* target = name.starts_with("buffer:") ? buffers.find(name.substr(7))
                                                        : params.find(name);
    if (target == nullptr) throw InvalidArgument("module has no tensor named " + name);
    target->copy_(tensor);
  }
}

}  // namespace coremil
