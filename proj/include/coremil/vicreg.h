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

#ifndef COREMIL_VICREG_H_
#define COREMIL_VICREG_H_

#include <torch/torch.h>

#include "coremil/config.h"

namespace coremil {

// Individual terms are unweighted; total = lambda*s + mu*(v_a + v_b) +
// nu*(c_a + c_b).
struct VicregTerms {
  torch::Tensor total;
  torch::Tensor invariance;
  torch::Tensor variance;    // v(Z) + v(Z')
  torch::Tensor covariance;  // c(Z) + c(Z')
};

// Mean squared difference over all elements.
torch::Tensor InvarianceTerm(const torch::Tensor& z_a, const torch::Tensor& z_b);

// Mean over dimensions of relu(gamma - sqrt(unbiased variance + eps)).
torch::Tensor VarianceTerm(const torch::Tensor& z, double gamma, double epsilon);

// Sum of squared off-diagonal entries of the (N-1)-normalized covariance,
// divided by the dimension.
torch::Tensor CovarianceTerm(const torch::Tensor& z);

// Both embeddings are N x d with N >= 2.
VicregTerms VicregLoss(const torch::Tensor& z_a, const torch::Tensor& z_b,
                       const VicregWeights& weights);

}  // namespace coremil

#endif  // COREMIL_VICREG_H_
