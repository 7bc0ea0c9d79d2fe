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

#include "coremil/transformer.h"

#include <cmath>

#include "coremil/errors.h"

namespace coremil {

namespace nn = torch::nn;

AttentionResult ScaledDotProductAttention(const torch::Tensor& q, const torch::Tensor& k,
                                          const torch::Tensor& v) {
  const double scale = 1.0 / std::sqrt(static_cast<double>(q.size(-1)));
  torch::Tensor a = torch::softmax(q.matmul(k.transpose(-2, -1)) * scale, -1);
  return {a.matmul(v), a};
}

AttentionResult SelfAttentionHead(const torch::Tensor& y, const torch::Tensor& wq,
                                  const torch::Tensor& wk, const torch::Tensor& wv) {
  return ScaledDotProductAttention(y.matmul(wq), y.matmul(wk), y.matmul(wv));
}

MultiHeadSelfAttentionImpl::MultiHeadSelfAttentionImpl(int dim, int heads) : heads_(heads) {
  if (heads < 1 || dim % heads != 0) throw InvalidArgument("dim must be divisible by heads");
  qkv_ = register_module("qkv", nn::Linear(dim, 3 * dim));
  out_ = register_module("out", nn::Linear(dim, dim));
}

AttentionResult MultiHeadSelfAttentionImpl::forward(const torch::Tensor& x, bool keep_attention) {
  const int64_t n = x.size(0);
  const int64_t dim = x.size(1);
  const int64_t dh = dim / heads_;
  // n x 3 x heads x dh -> 3 x heads x n x dh
  torch::Tensor qkv = qkv_(x).view({n, 3, heads_, dh}).permute({1, 2, 0, 3});
  AttentionResult r = ScaledDotProductAttention(qkv[0], qkv[1], qkv[2]);
  if (keep_attention && r.attention.requires_grad()) r.attention.retain_grad();
  torch::Tensor merged = r.output.transpose(0, 1).reshape({n, dim});
  return {out_(merged), r.attention};
}

TransformerBlockImpl::TransformerBlockImpl(int dim, int heads, int mlp_dim) {
  norm1_ = register_module("norm1", nn::LayerNorm(nn::LayerNormOptions({dim})));
  attention_ = register_module("attention", MultiHeadSelfAttention(dim, heads));
  norm2_ = register_module("norm2", nn::LayerNorm(nn::LayerNormOptions({dim})));
  fc1_ = register_module("fc1", nn::Linear(dim, mlp_dim));
  fc2_ = register_module("fc2", nn::Linear(mlp_dim, dim));
}

AttentionResult TransformerBlockImpl::forward(const torch::Tensor& x, bool keep_attention) {
  AttentionResult a = attention_(norm1_(x), keep_attention);
  torch::Tensor h = x + a.output;
  h = h + fc2_(torch::gelu(fc1_(norm2_(h))));
  return {h, a.attention};
}

CoreTransformerImpl::CoreTransformerImpl(const TransformerConfig& config) : config_(config) {
  config_.Validate();
  input_ = register_module("input", nn::Linear(config_.input_dim, config_.dim));
  position_table_ = register_parameter(
      "position_table",
      torch::randn({static_cast<int64_t>(config_.grid_axial) * config_.grid_lateral, config_.dim}) * 0.02);
  for (int b = 0; b < config_.blocks; ++b) {
    blocks_.push_back(register_module("block" + std::to_string(b),
                                      TransformerBlock(config_.dim, config_.heads, config_.mlp_dim)));
  }
  final_norm_ = register_module("final_norm", nn::LayerNorm(nn::LayerNormOptions({config_.dim})));
  classifier_ = register_module("classifier", nn::Linear(config_.dim, config_.num_classes));
}

AggregatorOutput CoreTransformerImpl::forward(const torch::Tensor& features,
                                              const torch::Tensor& grid, bool keep_attention) {
  if (features.dim() != 2 || features.size(1) != config_.input_dim) {
    throw InvalidArgument("transformer expects n x input_dim features");
  }
  if (grid.dim() != 2 || grid.size(0) != features.size(0) || grid.size(1) != 2) {
    throw AlignmentError("grid indices must be n x 2 and match the features");
  }
  if (features.size(0) == 0) throw EmptyBagError("transformer got an empty bag");
  const torch::Tensor ax = grid.select(1, 0);
  const torch::Tensor lat = grid.select(1, 1);
  if ((ax < 0).any().item<bool>() || (ax >= config_.grid_axial).any().item<bool>() ||
      (lat < 0).any().item<bool>() || (lat >= config_.grid_lateral).any().item<bool>()) {
    throw InvalidArgument("ROI grid position outside the positional table");
  }
  const torch::Tensor index = ax * config_.grid_lateral + lat;
  torch::Tensor h = input_(features) + position_table_.index_select(0, index);
  AggregatorOutput out;
  for (TransformerBlock& block : blocks_) {
    AttentionResult r = block(h, keep_attention);
    h = r.output;
    out.attentions.push_back(r.attention);
  }
  out.pooled = final_norm_(h).mean(0);
  out.logits = classifier_(out.pooled).unsqueeze(0);
  return out;
}

std::vector<int64_t> RoiDropout(int64_t n, double rate, Rng& rng) {
  if (n < 1) throw EmptyBagError("ROI dropout on an empty bag");
  if (rate < 0 || rate > 1) throw InvalidArgument("ROI dropout rate must lie in [0, 1]");
  std::vector<int64_t> kept;
  for (int64_t i = 0; i < n; ++i) {
    if (Uniform01(rng) >= rate) kept.push_back(i);
  }
  if (kept.empty()) {
    kept.push_back(static_cast<int64_t>(Uniform01(rng) * static_cast<double>(n)));
  }
  return kept;
}

}  // namespace coremil
