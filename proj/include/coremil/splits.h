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

#ifndef COREMIL_SPLITS_H_
#define COREMIL_SPLITS_H_

#include <cstdint>
#include <string>
#include <vector>

#include "coremil/manifest.h"
#include "coremil/rng.h"

namespace coremil {

enum class SplitMode {
  // Every run re-draws train/val/test from its own seed.
  kSeedOnly,
  // Test cohort fixed by the seed; validation is fold `fold` of the remaining
  // patients of each center, partitioned into n_folds folds.
  kValidationFold,
};

struct SplitSpec {
  double train = 0.60;
  double val = 0.15;
  double test = 0.25;
  std::uint64_t seed = 0;
  SplitMode mode = SplitMode::kSeedOnly;
  int n_folds = 5;
  int fold = 0;

  void Validate() const;
};

struct Splits {
  Manifest train;
  Manifest val;
  Manifest test;
  std::vector<std::string> warnings;

  const Manifest& Get(const std::string& name) const;
};

// Patient-exclusive split performed per center, then unioned across centers.
// Within a center, patients are shuffled and the first round(train * n) go to
// train and the next round(val * n) to val; the rest are test. Centers with
// fewer than 3 patients get the same rule (some splits then stay empty for
// that center) and a warning is recorded. Rows keep their manifest order.
Splits MakeSplits(const Manifest& manifest, const SplitSpec& spec);

struct SelectionPolicy {
  double min_involvement = 0.40;
  bool benign_match = true;
};

// Drops cancer cores with involvement <= min_involvement, then (if
// benign_match) keeps a uniformly random subset of benign cores equal in size
// to the remaining cancer count. Balance is exact whenever enough benign cores
// exist; otherwise every benign core is kept. Throws InvalidArgument when no
// cancer core survives.
Manifest SelectCores(const Manifest& manifest, const SelectionPolicy& policy, Rng& rng);

// FNV-1a, stable across platforms and runs.
std::uint64_t StableHash(const std::string& text);

}  // namespace coremil

#endif  // COREMIL_SPLITS_H_
