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

#include "coremil/splits.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <fmt/format.h>

#include "coremil/errors.h"

namespace coremil {
namespace {

template <typename T>
void Shuffle(std::vector<T>& v, Rng& rng) {
  // Fisher-Yates with an explicit index draw so the permutation does not
  // depend on the standard library's shuffle implementation.
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(Uniform01(rng) * static_cast<double>(i));
    std::swap(v[i - 1], v[std::min(j, i - 1)]);
  }
}

}  // namespace

std::uint64_t StableHash(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void SplitSpec::Validate() const {
  if (train < 0 || val < 0 || test < 0 || std::abs(train + val + test - 1.0) > 1e-9) {
    throw InvalidArgument("split fractions must be nonnegative and sum to 1");
  }
  if (mode == SplitMode::kValidationFold && (n_folds < 2 || fold < 0 || fold >= n_folds)) {
    throw InvalidArgument("validation fold must satisfy 0 <= fold < n_folds, n_folds >= 2");
  }
}

const Manifest& Splits::Get(const std::string& name) const {
  if (name == "train") return train;
  if (name == "val") return val;
  if (name == "test") return test;
  throw InvalidArgument("unknown split '" + name + "' (expected train, val or test)");
}

Splits MakeSplits(const Manifest& manifest, const SplitSpec& spec) {
  spec.Validate();
  if (manifest.empty()) throw InvalidArgument("cannot split an empty manifest");
  ValidateManifest(manifest);

  std::map<std::string, std::set<std::string>> patients_by_center;
  for (const ManifestRow& r : manifest) patients_by_center[r.center_id].insert(r.patient_id);

  enum Which { kTrain, kVal, kTest };
  std::map<std::string, Which> assignment;
  Splits out;
  for (const auto& [center, patient_set] : patients_by_center) {
    std::vector<std::string> patients(patient_set.begin(), patient_set.end());
    const std::size_t n = patients.size();
    if (n < 3) {
      out.warnings.push_back(fmt::format(
          "center {} has only {} patient(s); some splits receive none of its patients", center, n));
    }
    Rng rng = MakeRng(spec.seed, {StableHash(center)});
    Shuffle(patients, rng);
    const auto n_train = std::min(n, static_cast<std::size_t>(std::lround(spec.train * n)));
    const auto n_val = std::min(n - n_train, static_cast<std::size_t>(std::lround(spec.val * n)));

    if (spec.mode == SplitMode::kSeedOnly) {
      for (std::size_t i = 0; i < n; ++i) {
        assignment[patients[i]] = i < n_train ? kTrain : (i < n_train + n_val ? kVal : kTest);
      }
    } else {
      // Test = tail, as in seed-only mode; the head is cut into folds.
      const std::size_t n_dev = n_train + n_val;
      for (std::size_t i = 0; i < n; ++i) {
        if (i >= n_dev) {
          assignment[patients[i]] = kTest;
        } else {
          const auto fold_of = static_cast<int>(i * spec.n_folds / std::max<std::size_t>(n_dev, 1));
          assignment[patients[i]] = fold_of == spec.fold ? kVal : kTrain;
        }
      }
    }
  }
  for (const ManifestRow& r : manifest) {
    switch (assignment.at(r.patient_id)) {
      case kTrain: out.train.push_back(r); break;
      case kVal: out.val.push_back(r); break;
      case kTest: out.test.push_back(r); break;
    }
  }
  return out;
}

Manifest SelectCores(const Manifest& manifest, const SelectionPolicy& policy, Rng& rng) {
  std::vector<std::size_t> cancer, benign;
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    const ManifestRow& r = manifest[i];
    if (r.is_cancer()) {
      if (r.involvement > policy.min_involvement) cancer.push_back(i);
    } else {
      benign.push_back(i);
    }
  }
  if (cancer.empty()) {
    throw InvalidArgument("selection leaves no cancer cores; the benign match is undefined");
  }
  std::vector<char> keep(manifest.size(), 0);
  for (std::size_t i : cancer) keep[i] = 1;
  if (policy.benign_match && benign.size() > cancer.size()) {
    Shuffle(benign, rng);
    benign.resize(cancer.size());
  }
  for (std::size_t i : benign) keep[i] = 1;
  Manifest out;
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    if (keep[i]) out.push_back(manifest[i]);
  }
  return out;
}

}  // namespace coremil
