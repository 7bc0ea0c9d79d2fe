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

#include "coremil/checkpoint.h"

#include <fstream>

#include <gtest/gtest.h>

#include "coremil/errors.h"
#include "test_support.h"

namespace coremil {
namespace {

using testing::TempDir;

CheckpointMeta SampleMeta() {
  CheckpointMeta m;
  m.kind = "method";
  m.method = "transformer";
  m.config_hash = "00112233aabbccdd";
  m.config_ini = "[run]\nseed = 1\n";
  m.history = {{"best_epoch", 2}};
  return m;
}

TEST(Checkpoint, RoundTripOfModulesStatesJsonAndOptimizer) {
  TempDir dir("ckpt");
  torch::manual_seed(1);
  torch::nn::Linear a(4, 3), b(4, 3);
  torch::optim::Adam opt(a->parameters(), torch::optim::AdamOptions(0.1));
  a(torch::randn({2, 4})).sum().backward();
  opt.step();
  const ModuleState state = CaptureState(*a);

  CheckpointWriter w(SampleMeta());
  w.AddModule("net", *a);
  w.AddState("snapshot", state);
  w.AddOptimizer("opt", opt);
  w.AddJson("extra", {{"k", 3}});
  w.Save(dir.path() / "x.pt");
  EXPECT_FALSE(std::filesystem::exists(dir.path() / "x.pt.tmp"));

  CheckpointReader r(dir.path() / "x.pt");
  EXPECT_EQ(r.meta().kind, "method");
  EXPECT_EQ(r.meta().format_version, kCheckpointFormatVersion);
  EXPECT_EQ(r.meta().history.at("best_epoch"), 2);
  EXPECT_TRUE(r.Has("net"));
  EXPECT_FALSE(r.Has("missing"));
  r.LoadModule("net", *b);
  EXPECT_TRUE(a->weight.equal(b->weight));
  const ModuleState back = r.ReadState("snapshot");
  ASSERT_EQ(back.tensors.size(), state.tensors.size());
  EXPECT_EQ(back.tensors[0].first, state.tensors[0].first);
  EXPECT_TRUE(back.tensors[0].second.equal(state.tensors[0].second));
  EXPECT_EQ(r.ReadJson("extra").at("k"), 3);
  torch::optim::Adam opt2(b->parameters(), torch::optim::AdamOptions(0.1));
  r.LoadOptimizer("opt", opt2);
}

TEST(Checkpoint, HashAndKindChecks) {
  TempDir dir("ckpt");
  CheckpointWriter w(SampleMeta());
  w.Save(dir.path() / "x.pt");
  CheckpointReader r(dir.path() / "x.pt");
  EXPECT_NO_THROW(r.RequireConfigHash("00112233aabbccdd"));
  EXPECT_THROW(r.RequireConfigHash("ffffffffffffffff"), ConfigMismatchError);
  EXPECT_NO_THROW(r.RequireKind("method"));
  EXPECT_THROW(r.RequireKind("pretrain"), InvalidArgument);
}

TEST(Checkpoint, GarbageAndMissingFilesAreRejected) {
  TempDir dir("ckpt");
  std::ofstream(dir.path() / "junk.pt") << "definitely not an archive";
  EXPECT_THROW(CheckpointReader(dir.path() / "junk.pt"), Error);
  EXPECT_THROW(CheckpointReader(dir.path() / "absent.pt"), Error);
}

TEST(Checkpoint, FutureFormatVersionIsRejected) {
  TempDir dir("ckpt");
  CheckpointMeta m = SampleMeta();
  m.format_version = kCheckpointFormatVersion + 1;
  CheckpointWriter(m).Save(dir.path() / "x.pt");
  EXPECT_THROW(CheckpointReader(dir.path() / "x.pt"), FormatError);
  EXPECT_EQ(MetaFromJson(ToJson(SampleMeta())).config_ini, SampleMeta().config_ini);
}

TEST(ModuleState, RestoreRejectsUnknownNames) {
  torch::nn::Linear a(2, 2);
  ModuleState s;
  s.tensors.emplace_back("nonexistent", torch::zeros({2}));
  EXPECT_THROW(RestoreState(*a, s), InvalidArgument);
}

}  // namespace
}  // namespace coremil
