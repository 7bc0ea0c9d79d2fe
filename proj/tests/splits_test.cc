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

#include <set>

#include <gtest/gtest.h>

#include "coremil/errors.h"
#include "test_support.h"

namespace coremil {
namespace {

using testing::RandomManifest;

std::set<std::string> Patients(const Manifest& m) {
  std::set<std::string> out;
  for (const ManifestRow& r : m) out.insert(r.patient_id);
  return out;
}

bool Disjoint(const std::set<std::string>& a, const std::set<std::string>& b) {
  for (const std::string& x : a) {
    if (b.contains(x)) return false;
  }
  return true;
}

Manifest OneCenter(int patients) {
  Manifest m;
  for (int p = 0; p < patients; ++p) {
    m.push_back({"core" + std::to_string(p), "p" + std::to_string(p), "only"});
  }
  return m;
}

TEST(MakeSplits, HundredPatientsGoSixtyFifteenTwentyFive) {
  const Splits s = MakeSplits(OneCenter(100), SplitSpec{});
  EXPECT_EQ(Patients(s.train).size(), 60u);
  EXPECT_EQ(Patients(s.val).size(), 15u);
  EXPECT_EQ(Patients(s.test).size(), 25u);
  EXPECT_TRUE(s.warnings.empty());
}

TEST(MakeSplits, PatientExclusiveAndCompleteOnRandomManifests) {
  Rng rng(2024);
  for (int trial = 0; trial < 100; ++trial) {
    const Manifest m = RandomManifest(rng);
    SplitSpec spec;
    spec.seed = trial;
    const Splits s = MakeSplits(m, spec);
    const auto tr = Patients(s.train), va = Patients(s.val), te = Patients(s.test);
    EXPECT_TRUE(Disjoint(tr, va) && Disjoint(tr, te) && Disjoint(va, te)) << "trial " << trial;
    EXPECT_EQ(s.train.size() + s.val.size() + s.test.size(), m.size());
  }
}

TEST(MakeSplits, SameSeedSameSplitsOtherSeedDiffers) {
  const Manifest m = OneCenter(40);
  SplitSpec spec;
  spec.seed = 4;
  EXPECT_EQ(Patients(MakeSplits(m, spec).test), Patients(MakeSplits(m, spec).test));
  SplitSpec other = spec;
  other.seed = 5;
  EXPECT_NE(Patients(MakeSplits(m, spec).test), Patients(MakeSplits(m, other).test));
}

TEST(MakeSplits, EachCenterIsSplitSeparately) {
  Manifest m;
  for (int p = 0; p < 40; ++p) {
    m.push_back({"k" + std::to_string(p), "p" + std::to_string(p), p < 20 ? "a" : "b"});
  }
  const Splits s = MakeSplits(m, SplitSpec{});
  int test_a = 0;
  for (const ManifestRow& r : s.test) test_a += r.center_id == "a";
  EXPECT_EQ(test_a, 5);
  EXPECT_EQ(s.test.size(), 10u);
}

TEST(MakeSplits, TinyCenterWarns) {
  Manifest m = OneCenter(20);
  m.push_back({"lonely", "solo", "tiny"});
  const Splits s = MakeSplits(m, SplitSpec{});
  EXPECT_EQ(s.warnings.size(), 1u);
}

TEST(MakeSplits, ValidationFoldsKeepTestFixedAndCoverDevelopment) {
  const Manifest m = OneCenter(50);
  SplitSpec spec;
  spec.mode = SplitMode::kValidationFold;
  std::set<std::string> seen_val;
  std::set<std::string> test;
  for (int fold = 0; fold < spec.n_folds; ++fold) {
    spec.fold = fold;
    const Splits s = MakeSplits(m, spec);
    if (fold == 0) test = Patients(s.test);
    EXPECT_EQ(Patients(s.test), test);
    for (const std::string& p : Patients(s.val)) EXPECT_TRUE(seen_val.insert(p).second);
  }
  EXPECT_EQ(seen_val.size() + test.size(), 50u);
}

TEST(MakeSplits, RejectsBadFractionsAndUnknownSplitNames) {
  SplitSpec spec;
  spec.test = 0.3;
  EXPECT_THROW(MakeSplits(OneCenter(10), spec), InvalidArgument);
  EXPECT_THROW(MakeSplits(Manifest{}, SplitSpec{}), InvalidArgument);
  EXPECT_THROW(MakeSplits(OneCenter(10), SplitSpec{}).Get("holdout"), InvalidArgument);
}

TEST(SelectCores, CountingExample) {
  Manifest m;
  for (int i = 0; i < 10; ++i) m.push_back({"c" + std::to_string(i), "p", "x", CoreLabel::kCancer, 0.5});
  for (int i = 0; i < 50; ++i) m.push_back({"b" + std::to_string(i), "p", "x"});
  Rng rng(1);
  const Manifest out = SelectCores(m, SelectionPolicy{}, rng);
  int cancer = 0;
  for (const ManifestRow& r : out) cancer += r.is_cancer();
  EXPECT_EQ(cancer, 10);
  EXPECT_EQ(out.size(), 20u);
}

TEST(SelectCores, BoundaryInvolvementIsExcluded) {
  Manifest m = {{"a", "p", "x", CoreLabel::kCancer, 0.40},
                {"b", "p", "x", CoreLabel::kCancer, 0.4000001},
                {"c", "p", "x"},
                {"d", "p", "x"}};
  Rng rng(1);
  const Manifest out = SelectCores(m, SelectionPolicy{}, rng);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].core_id, "b");
}

TEST(SelectCores, BenignOnlyIsAnError) {
  Manifest m = {{"a", "p", "x"}, {"b", "p", "x", CoreLabel::kCancer, 0.3}};
  Rng rng(1);
  EXPECT_THROW(SelectCores(m, SelectionPolicy{}, rng), InvalidArgument);
}

TEST(SelectCores, ExactBalanceAndBoundaryOnRandomManifests) {
  Rng rng(77);
  int checked = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const Manifest m = RandomManifest(rng);
    int eligible = 0, benign = 0;
    for (const ManifestRow& r : m) {
      eligible += r.is_cancer() && r.involvement > 0.40;
      benign += !r.is_cancer();
    }
    if (eligible == 0) continue;
    Rng pick(trial);
    const Manifest out = SelectCores(m, SelectionPolicy{}, pick);
    int c = 0, b = 0;
    for (const ManifestRow& r : out) {
      if (r.is_cancer()) {
        EXPECT_GT(r.involvement, 0.40);
        ++c;
      } else {
        ++b;
      }
    }
    EXPECT_EQ(c, eligible);
    if (benign >= eligible) {
      EXPECT_EQ(b, c);
    } else {
      EXPECT_EQ(b, benign);
    }
    ++checked;
  }
  EXPECT_GT(checked, 90);
}

}  // namespace
}  // namespace coremil
