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

#ifndef COREMIL_TESTS_TEST_SUPPORT_H_
#define COREMIL_TESTS_TEST_SUPPORT_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "coremil/config.h"
#include "coremil/manifest.h"
#include "coremil/rng.h"

namespace coremil::testing {

// Pair-counting AUROC: a win is 1, a tie 1/2.
inline double BruteForceAuroc(std::span<const double> scores, std::span<const int> labels) {
  double wins = 0.0;
  long pairs = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 1) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != 0) continue;
      ++pairs;
      if (scores[i] > scores[j]) wins += 1.0;
      else if (scores[i] == scores[j]) wins += 0.5;
    }
  }
  return wins / static_cast<double>(pairs);
}

// A fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("coremil_" + tag + "_" + std::to_string(MixSeed(reinterpret_cast<std::uintptr_t>(this))));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

// Small, fast run configuration: 80 cores from one center, 32x32 ROIs, tiny
// networks, two epochs.
inline RunConfig TinyConfig(std::uint64_t seed = 3) {
  return ParseRunConfig("", {
      "run.seed=" + std::to_string(seed),
      "dataset.n_patients=20",
      "phantom.n_centers=1",
      "dataset.cores_per_patient=4",
      "roi.output_rows=32",
      "roi.output_cols=32",
      "backbone.stem_channels=8",
      "backbone.stem_kernel=4",
      "backbone.stem_stride=4",
      "backbone.stage_channels=8,8,16,16",
      "backbone.feature_dim=32",
      "projector.widths=32,32",
      "ssl.epochs=2",
      "ssl.warmup_epochs=1",
      "ssl.batch_size=16",
      "ssl.eval_every=1",
      "ssl.rois_per_core=4",
      "ssl.probe_rois_per_core=4",
      "transformer.blocks=1",
      "transformer.heads=2",
      "transformer.dim=16",
      "transformer.mlp_dim=16",
      "transformer.input_dim=32",
      "stage2.epochs=2",
      "stage2.transformer_warmup_epochs=1",
      "stage2.backbone_warmup_epochs=1",
      "baseline.mil_hidden=8",
      "baseline.roi_batch_size=32",
  });
}

// Random manifest: 5..60 patients spread over 1..6 centers, 1..12 cores each,
// about 40% cancer with involvement uniform on [0.1, 1] (a few exactly 0.40).
inline Manifest RandomManifest(Rng& rng) {
  const int n_patients = 5 + static_cast<int>(Uniform01(rng) * 56);
  const int n_centers = 1 + static_cast<int>(Uniform01(rng) * 6);
  Manifest m;
  for (int p = 0; p < n_patients; ++p) {
    const int cores = 1 + static_cast<int>(Uniform01(rng) * 12);
    for (int c = 0; c < cores; ++c) {
      ManifestRow row;
      row.patient_id = "p" + std::to_string(p);
      row.core_id = row.patient_id + "-" + std::to_string(c);
      row.center_id = "c" + std::to_string(p % n_centers);
      if (Uniform01(rng) < 0.4) {
        row.label = CoreLabel::kCancer;
        row.involvement = Uniform01(rng) < 0.1 ? 0.40 : 0.1 + 0.9 * Uniform01(rng);
      }
      m.push_back(row);
    }
  }
  return m;
}

// Plain-loop VICReg total over row-major N x d matrices: weighted MSE
// invariance, hinge on the unbiased std, and scaled off-diagonal covariance.
inline double VicregOracle(const std::vector<double>& a, const std::vector<double>& b, int n,
                           int d, double lambda, double mu, double nu, double gamma,
                           double eps) {
  double inv = 0.0;
  for (int i = 0; i < n * d; ++i) inv += (a[i] - b[i]) * (a[i] - b[i]);
  inv /= n * d;
  auto var_cov = [&](const std::vector<double>& z, double& v, double& c) {
    std::vector<double> mean(d, 0.0);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < d; ++j) mean[j] += z[i * d + j] / n;
    }
    v = 0.0;
    c = 0.0;
    for (int j = 0; j < d; ++j) {
      for (int k = 0; k < d; ++k) {
        double cov = 0.0;
        for (int i = 0; i < n; ++i) cov += (z[i * d + j] - mean[j]) * (z[i * d + k] - mean[k]);
        cov /= n - 1;
        if (j == k) {
          v += std::max(0.0, gamma - std::sqrt(cov + eps)) / d;
        } else {
          c += cov * cov / d;
        }
      }
    }
  };
  double va, ca, vb, cb;
  var_cov(a, va, ca);
  var_cov(b, vb, cb);
  return lambda * inv + mu * (va + vb) + nu * (ca + cb);
}

// Plain-loop single-head attention: softmax(Y Wq (Y Wk)^T / sqrt(dk)) Y Wv.
// Y is n x d, Wq/Wk are d x dk and Wv is d x dv, all row-major.
inline std::vector<double> AttentionOracle(const std::vector<double>& y,
                                           const std::vector<double>& wq,
                                           const std::vector<double>& wk,
                                           const std::vector<double>& wv, int n, int d, int dk,
                                           int dv) {
  auto project = [&](const std::vector<double>& w, int cols) {
    std::vector<double> out(static_cast<std::size_t>(n) * cols, 0.0);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < cols; ++j) {
        for (int k = 0; k < d; ++k) out[i * cols + j] += y[i * d + k] * w[k * cols + j];
      }
    }
    return out;
  };
  const std::vector<double> q = project(wq, dk), k = project(wk, dk), v = project(wv, dv);
  std::vector<double> out(static_cast<std::size_t>(n) * dv, 0.0);
  for (int i = 0; i < n; ++i) {
    std::vector<double> logits(n);
    double top = -1e300;
    for (int j = 0; j < n; ++j) {
      double dot = 0.0;
      for (int c = 0; c < dk; ++c) dot += q[i * dk + c] * k[j * dk + c];
      logits[j] = dot / std::sqrt(static_cast<double>(dk));
      top = std::max(top, logits[j]);
    }
    double z = 0.0;
    for (double& l : logits) z += (l = std::exp(l - top));
    for (int j = 0; j < n; ++j) {
      for (int c = 0; c < dv; ++c) out[i * dv + c] += logits[j] / z * v[j * dv + c];
    }
  }
  return out;
}

}  // namespace coremil::testing

#endif  // COREMIL_TESTS_TEST_SUPPORT_H_
