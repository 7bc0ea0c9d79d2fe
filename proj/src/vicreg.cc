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

#include "coremil/vicreg.h"

#include "coremil/errors.h"

namespace coremil {
namespace {

void CheckEmbedding(const torch::Tensor& z) {
  if (z.dim() != 2) throw InvalidArgument("embeddings must be N x d");
  if (z.size(0) < 2) throw InvalidArgument("variance needs a batch of at least 2");
}

}  // namespace

torch::Tensor InvarianceTerm(const torch::Tensor& z_a, const torch::Tensor& z_b) {
  return (z_a - z_b).pow(2).mean();
}

torch::Tensor VarianceTerm(const torch::Tensor& z, double gamma, double epsilon) {
  CheckEmbedding(z);
  const torch::Tensor std = torch::sqrt(z.var(0, /*unbiased=*/true) + epsilon);
  return torch::relu(gamma - std).mean();
}

torch::Tensor CovarianceTerm(const torch::Tensor& z) {
  CheckEmbedding(z);
  const int64_t n = z.size(0);
  const int64_t d = z.size(1);
  const torch::Tensor centered = z - z.mean(0, /*keepdim=*/true);
  const torch::Tensor cov = centered.t().matmul(centered) / static_cast<double>(n - 1);
  const torch::Tensor diag = torch::eye(d, z.options().dtype(torch::kBool));
  return cov.masked_fill(diag, 0.0).pow(2).sum() / static_cast<double>(d);
}

VicregTerms VicregLoss(const torch::Tensor& z_a, const torch::Tensor& z_b,
                       const VicregWeights& weights) {
  CheckEmbedding(z_a);
  CheckEmbedding(z_b);
  if (!z_a.sizes().equals(z_b.sizes())) throw InvalidArgument("embedding shapes differ");
  VicregTerms t;
  t.invariance = InvarianceTerm(z_a, z_b);
  t.variance = VarianceTerm(z_a, weights.gamma, weights.epsilon) +
               VarianceTerm(z_b, weights.gamma, weights.epsilon);
  t.covariance = CovarianceTerm(z_a) + CovarianceTerm(z_b);
  t.total = weights.lambda * t.invariance + weights.mu * t.variance + weights.nu * t.covariance;
  return t;
}

}  // namespace coremil
