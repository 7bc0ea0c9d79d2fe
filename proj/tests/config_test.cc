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

#include "coremil/config.h"

#include <fstream>

#include <gtest/gtest.h>

#include "coremil/errors.h"
#include "test_support.h"

namespace coremil {
namespace {

using testing::TempDir;

TEST(RunConfig, DefaultsFollowTheFullScaleProfile) {
  const RunConfig c = ParseRunConfig("");
  EXPECT_EQ(c.backbone.feature_dim, 512);
  EXPECT_EQ(c.transformer.blocks, 12);
  EXPECT_EQ(c.transformer.heads, 8);
  EXPECT_EQ(c.transformer.dim, 256);
  EXPECT_EQ(c.ssl.eval_every, 5);
  EXPECT_DOUBLE_EQ(c.vicreg.gamma, 1.0);
  EXPECT_DOUBLE_EQ(c.vicreg.epsilon, 1e-4);
  EXPECT_DOUBLE_EQ(c.split.train, 0.60);
  EXPECT_DOUBLE_EQ(c.selection.min_involvement, 0.40);
  EXPECT_DOUBLE_EQ(c.transformer.roi_dropout, 0.2);
  EXPECT_EQ(c.stage2.cores_per_batch, 8);
}

TEST(RunConfig, FileThenOverridesAndSeedPropagation) {
  const RunConfig c = ParseRunConfig("[run]\nseed = 4\n[ssl]\nepochs = 7\nwarmup_epochs = 1\n",
                                     {"ssl.epochs=9", "transformer.heads=4"});
  EXPECT_EQ(c.ssl.epochs, 9);
  EXPECT_EQ(c.transformer.heads, 4);
  EXPECT_EQ(c.seed, 4u);
  EXPECT_EQ(c.split.seed, 4u);
  EXPECT_EQ(c.dataset.seed, 4u);
}

TEST(RunConfig, ListValuesParse) {
  const RunConfig c = ParseRunConfig("", {"backbone.stage_channels=8,16,24,32"});
  EXPECT_EQ(c.backbone.stage_channels, (std::vector<int>{8, 16, 24, 32}));
}

TEST(RunConfig, UnknownKeysAndBadValuesAreRejected) {
  EXPECT_THROW(ParseRunConfig("", {"ssl.epoch=3"}), InvalidArgument);
  EXPECT_THROW(ParseRunConfig("", {"nosuch.key=3"}), InvalidArgument);
  EXPECT_THROW(ParseRunConfig("", {"ssl.epochs=three"}), InvalidArgument);
  EXPECT_THROW(ParseRunConfig("", {"ssl.epochs"}), InvalidArgument);
  EXPECT_THROW(ParseRunConfig("[ssl\nepochs=3\n"), InvalidArgument);
}

TEST(RunConfig, CrossFieldRulesAreChecked) {
  EXPECT_THROW(ParseRunConfig("", {"ssl.warmup_epochs=200"}), InvalidArgument);
  EXPECT_THROW(ParseRunConfig("", {"stage2.epochs=5"}), InvalidArgument);  // warmup 10
  EXPECT_THROW(ParseRunConfig("", {"transformer.heads=7"}), InvalidArgument);
  EXPECT_THROW(ParseRunConfig("", {"backbone.feature_dim=256"}), InvalidArgument);
  EXPECT_THROW(ParseRunConfig("", {"split.test=0.5"}), InvalidArgument);
  EXPECT_THROW(ParseRunConfig("", {"transformer.grid_lateral=10"}), InvalidArgument);
  EXPECT_THROW(ParseRunConfig("", {"roi.stride_mm=6"}), InvalidArgument);
  EXPECT_THROW(ParseRunConfig("", {"backbone.stem_stride=4"}), InvalidArgument);  // kernel 3
  EXPECT_THROW(ParseRunConfig("", {"augment.crop_scale_min=0"}), InvalidArgument);
}

TEST(RunConfig, CanonicalTextRoundTripsAndHashIsStable) {
  const RunConfig a = testing::TinyConfig(5);
  const RunConfig b = ParseRunConfig(a.ToIni());
  EXPECT_EQ(a.ToIni(), b.ToIni());
  EXPECT_EQ(a.Hash(), b.Hash());
  EXPECT_EQ(a.Hash().size(), 16u);
  RunConfig moved = a;
  moved.output_dir = "elsewhere";
  EXPECT_EQ(moved.Hash(), a.Hash());
  EXPECT_NE(testing::TinyConfig(6).Hash(), a.Hash());
  EXPECT_NE(ParseRunConfig(a.ToIni(), {"ssl.peak_lr=0.002"}).Hash(), a.Hash());
}

TEST(RunConfig, LoadsFromFile) {
  TempDir dir("config");
  std::ofstream(dir.path() / "c.ini") << "[stage2]\nepochs = 20\n";
  EXPECT_EQ(LoadRunConfig(dir.path() / "c.ini").stage2.epochs, 20);
  EXPECT_THROW(LoadRunConfig(dir.path() / "missing.ini"), Error);
}

TEST(RunConfig, ShippedDeskProfileIsValid) {
  const RunConfig c = LoadRunConfig(COREMIL_SOURCE_DIR "/configs/desk.ini");
  EXPECT_EQ(c.ssl.epochs, 20);
  EXPECT_EQ(c.stage2.epochs, 15);
  EXPECT_EQ(c.backbone.feature_dim, 512);
}

}  // namespace
}  // namespace coremil
