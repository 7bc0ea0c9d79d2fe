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

#ifndef COREMIL_LINEAR_PROBE_H_
#define COREMIL_LINEAR_PROBE_H_

#include <span>

#include <torch/torch.h>

namespace coremil {

struct ProbeOptions {
  int max_iterations = 100;
  double l2 = 1e-3;
};

// L2-regularized logistic regression on standardized features, fit with
// L-BFGS in double precision.
class LinearProbe {
 public:
  static LinearProbe Fit(const torch::Tensor& features, std::span<const int> labels,
                         const ProbeOptions& options = {});
  // Probability of the positive class per row.
  std::vector<double> Score(const torch::Tensor& features) const;

 private:
  torch::Tensor mean_, scale_, weight_, bias_;
};

// Fits on train, returns AUROC on val. Throws UndefinedMetricError when either
// side holds a single class.
double LinearProbeAuroc(const torch::Tensor& train_features, std::span<const int> train_labels,
                        const torch::Tensor& val_features, std::span<const int> val_labels,
                        const ProbeOptions& options = {});

}  // namespace coremil

#endif  // COREMIL_LINEAR_PROBE_H_
