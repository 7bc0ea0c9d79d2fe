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

#include "coremil/linear_probe.h"

#include "coremil/errors.h"
#include "coremil/metrics.h"

namespace coremil {
namespace {

void CheckTwoClasses(std::span<const int> labels, const char* what) {
  bool pos = false, neg = false;
  for (int l : labels) (l == 1 ? pos : neg) = true;
  if (!pos || !neg) throw UndefinedMetricError(std::string(what) + " labels hold a single class");
}

}  // namespace

LinearProbe LinearProbe::Fit(const torch::Tensor& features, std::span<const int> labels,
                             const ProbeOptions& options) {
  if (features.dim() != 2 || features.size(0) != static_cast<int64_t>(labels.size())) {
    throw AlignmentError("probe features and labels differ in count");
  }
  CheckTwoClasses(labels, "probe training");
  torch::NoGradGuard outer;
  const torch::Tensor x = features.to(torch::kFloat64);
  LinearProbe probe;
  probe.mean_ = x.mean(0);
  torch::Tensor std = x.std(0, /*unbiased=*/false);
  probe.scale_ = torch::where(std > 1e-8, std, torch::ones_like(std));
  const torch::Tensor xs = (x - probe.mean_) / probe.scale_;
  const torch::Tensor y = torch::tensor(std::vector<double>(labels.begin(), labels.end()),
                                        torch::kFloat64);

  torch::Tensor w = torch::zeros({x.size(1)}, torch::kFloat64).requires_grad_(true);
  torch::Tensor b = torch::zeros({1}, torch::kFloat64).requires_grad_(true);
  torch::optim::LBFGS opt({w, b}, torch::optim::LBFGSOptions(1.0)
                                      .max_iter(options.max_iterations)
                                      .line_search_fn("strong_wolfe"));
  auto closure = [&]() {
    torch::AutoGradMode grad(true);
    opt.zero_grad();
    torch::Tensor loss =
        torch::binary_cross_entropy_with_logits(xs.matmul(w) + b, y) + options.l2 * w.pow(2).sum();
    loss.backward();
    return loss;
  };
  {
    torch::AutoGradMode grad(true);
    opt.step(closure);
  }
  probe.weight_ = w.detach();
  probe.bias_ = b.detach();
  return probe;
}

std::vector<double> LinearProbe::Score(const torch::Tensor& features) const {
  torch::NoGradGuard no_grad;
  const torch::Tensor xs = (features.to(torch::kFloat64) - mean_) / scale_;
  const torch::Tensor p = torch::sigmoid(xs.matmul(weight_) + bias_).contiguous();
  return {p.data_ptr<double>(), p.data_ptr<double>() + p.numel()};
}

double LinearProbeAuroc(const torch::Tensor& train_features, std::span<const int> train_labels,
                        const torch::Tensor& val_features, std::span<const int> val_labels,
                        const ProbeOptions& options) {
  CheckTwoClasses(val_labels, "probe validation");
  const LinearProbe probe = LinearProbe::Fit(train_features, train_labels, options);
  const std::vector<double> scores = probe.Score(val_features);
  return Auroc(scores, val_labels);
}

}  // namespace coremil
