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

#include "coremil/mil.h"

#include <gtest/gtest.h>

#include "coremil/errors.h"

namespace coremil {
namespace {

TEST(AggregateMean, MeanAndExactPermutationInvariance) {
  const std::vector<double> p = {0.1, 0.7, 0.4, 0.9, 0.25};
  EXPECT_NEAR(AggregateMean(p), 0.47, 1e-15);
  std::vector<double> q = p;
  std::sort(q.begin(), q.end());
  do {
    EXPECT_EQ(AggregateMean(q), AggregateMean(p));
  } while (std::next_permutation(q.begin(), q.end()));
  EXPECT_THROW(AggregateMean(std::vector<double>{}), EmptyBagError);
}

class AttentionMilTest : public ::testing::TestWithParam<bool> {};

TEST_P(AttentionMilTest, WeightsSumToOneAndPoolFeatures) {
  torch::manual_seed(1);
  AttentionMilImpl mil(12, 8, GetParam());
  for (int64_t n : {1, 5, 40}) {
    const torch::Tensor h = torch::randn({n, 12});
    const AggregatorOutput out = mil.forward(h, torch::zeros({n, 2}, torch::kInt64), false);
    ASSERT_EQ(out.roi_weights.numel(), n);
    EXPECT_NEAR(out.roi_weights.sum().item<double>(), 1.0, 1e-6);
    EXPECT_GE(out.roi_weights.min().item<double>(), 0.0);
    EXPECT_LT((out.pooled - out.roi_weights.matmul(h)).abs().max().item<double>(), 1e-6);
    EXPECT_EQ(out.logits.sizes(), (std::vector<int64_t>{1, 2}));
    EXPECT_TRUE(out.attentions.empty());
  }
}

TEST_P(AttentionMilTest, PermutationPermutesWeightsAndKeepsLogits) {
  torch::manual_seed(2);
  AttentionMilImpl mil(6, 4, GetParam());
  const torch::Tensor h = torch::randn({9, 6});
  const torch::Tensor grid = torch::zeros({9, 2}, torch::kInt64);
  const torch::Tensor perm = torch::randperm(9);
  const AggregatorOutput a = mil.forward(h, grid, false);
  const AggregatorOutput b = mil.forward(h.index_select(0, perm), grid, false);
  EXPECT_LT((a.logits - b.logits).abs().max().item<double>(), 1e-6);
  EXPECT_LT((a.roi_weights.index_select(0, perm) - b.roi_weights).abs().max().item<double>(), 1e-6);
}

TEST_P(AttentionMilTest, EmptyBagIsAnError) {
  AttentionMilImpl mil(6, 4, GetParam());
  EXPECT_THROW(mil.forward(torch::randn({0, 6}), torch::zeros({0, 2}, torch::kInt64), false),
               EmptyBagError);
}

INSTANTIATE_TEST_SUITE_P(PlainAndGated, AttentionMilTest, ::testing::Values(false, true));

}  // namespace
}  // namespace coremil
