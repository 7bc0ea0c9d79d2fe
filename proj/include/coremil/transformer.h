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

#ifndef COREMIL_TRANSFORMER_H_
#define COREMIL_TRANSFORMER_H_

#include <vector>

#include <torch/torch.h>

#include "coremil/aggregator.h"
#include "coremil/config.h"
#include "coremil/rng.h"

namespace coremil {

struct AttentionResult {
  torch::Tensor output;
  torch::Tensor attention;  // row-stochastic over the last dimension
};

// softmax(Q K^T / sqrt(d_head)) V over the last two dimensions.
AttentionResult ScaledDotProductAttention(const torch::Tensor& q, const torch::Tensor& k,
                                          const torch::Tensor& v);

// One head over token rows y (n x d): Q = y Wq, K = y Wk, V = y Wv.
AttentionResult SelfAttentionHead(const torch::Tensor& y, const torch::Tensor& wq,
                                  const torch::Tensor& wk, const torch::Tensor& wv);

class MultiHeadSelfAttentionImpl : public torch::nn::Module {
 public:
  MultiHeadSelfAttentionImpl(int dim, int heads);
  // x: n x dim. With keep_attention the heads x n x n map keeps its gradient
  // after backward.
  AttentionResult forward(const torch::Tensor& x, bool keep_attention = false);

 private:
  int heads_;
  torch::nn::Linear qkv_{nullptr}, out_{nullptr};
};
TORCH_MODULE(MultiHeadSelfAttention);

// Pre-norm block: x + MHSA(LN(x)), then x + MLP(LN(x)).
class TransformerBlockImpl : public torch::nn::Module {
 public:
  TransformerBlockImpl(int dim, int heads, int mlp_dim);
  AttentionResult forward(const torch::Tensor& x, bool keep_attention = false);

 private:
  torch::nn::LayerNorm norm1_{nullptr}, norm2_{nullptr};
  MultiHeadSelfAttention attention_{nullptr};
  torch::nn::Linear fc1_{nullptr}, fc2_{nullptr};
};
TORCH_MODULE(TransformerBlock);

// Linear input projection plus a learned embedding per ROI grid position,
// a stack of blocks, mean pooling over ROIs and a linear classifier.
class CoreTransformerImpl : public AggregatorImpl {
 public:
  explicit CoreTransformerImpl(const TransformerConfig& config);
  AggregatorOutput forward(const torch::Tensor& features, const torch::Tensor& grid,
                           bool keep_attention) override;

  const TransformerConfig& config() const { return config_; }

 private:
  TransformerConfig config_;
  torch::nn::Linear input_{nullptr};
  torch::Tensor position_table_;
  std::vector<TransformerBlock> blocks_;
  torch::nn::LayerNorm final_norm_{nullptr};
  torch::nn::Linear classifier_{nullptr};
};

// Indices of the ROIs kept when each is dropped independently with
// probability rate. At least one ROI always survives.
std::vector<int64_t> RoiDropout(int64_t n, double rate, Rng& rng);

}  // namespace coremil

#endif  // COREMIL_TRANSFORMER_H_
