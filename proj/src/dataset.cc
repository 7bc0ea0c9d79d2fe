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

#include "coremil/dataset.h"

#include <cstring>

#include "coremil/container.h"
#include "coremil/errors.h"
#include "coremil/rng.h"

namespace coremil {

torch::Tensor RoisToTensor(const std::vector<Image>& rois) {
  if (rois.empty()) throw EmptyBagError("no ROIs to stack");
  const int rows = rois.front().rows();
  const int cols = rois.front().cols();
  torch::Tensor out = torch::empty({static_cast<int64_t>(rois.size()), 1, rows, cols}, torch::kFloat32);
  float* dst = out.data_ptr<float>();
  const std::size_t stride = static_cast<std::size_t>(rows) * cols;
  for (std::size_t i = 0; i < rois.size(); ++i) {
    if (rois[i].rows() != rows || rois[i].cols() != cols) {
      throw InvalidArgument("ROIs of one bag must share a size");
    }
    std::memcpy(dst + i * stride, rois[i].storage().data(), stride * sizeof(float));
  }
  return out;
}

CoreSample MakeCoreSample(const ManifestRow& meta, const RoiBag& bag) {
  if (bag.size() == 0) throw EmptyBagError("core " + meta.core_id + " has an empty bag");
  if (bag.positions.size() != bag.size()) {
    throw AlignmentError("core " + meta.core_id + ": positions do not match ROIs");
  }
  CoreSample s;
  s.meta = meta;
  s.rois = RoisToTensor(bag.rois);
  s.positions = bag.positions;
  s.grid = torch::empty({static_cast<int64_t>(bag.size()), 2}, torch::kInt64);
  auto g = s.grid.accessor<int64_t, 2>();
  for (std::size_t i = 0; i < bag.size(); ++i) {
    g[i][0] = bag.positions[i].axial_index;
    g[i][1] = bag.positions[i].lateral_index;
  }
  return s;
}

CoreSet BuildCoreSet(const Manifest& manifest, const BagSource& source) {
  CoreSet set;
  set.reserve(manifest.size());
  for (const ManifestRow& row : manifest) set.push_back(MakeCoreSample(row, source(row)));
  return set;
}

std::vector<int> Labels(const CoreSet& cores) {
  std::vector<int> labels;
  labels.reserve(cores.size());
  for (const CoreSample& c : cores) labels.push_back(c.label());
  return labels;
}

std::filesystem::path BagPath(const std::filesystem::path& data_dir, const std::string& core_id) {
  return data_dir / "bags" / (core_id + ".bag");
}

BagSource BagsFromDirectory(const std::filesystem::path& data_dir) {
  return [data_dir](const ManifestRow& row) {
    RoiBag bag = ReadRoiBag(BagPath(data_dir, row.core_id));
    if (bag.core_id != row.core_id) {
      throw FormatError("bag for " + row.core_id + " carries core id " + bag.core_id);
    }
    return bag;
  };
}

Splits SplitAndSelect(const Manifest& manifest, const RunConfig& config) {
  Splits splits = MakeSplits(manifest, config.split);
  std::uint64_t key = 0;
  for (Manifest* part : {&splits.train, &splits.val, &splits.test}) {
    Rng rng = MakeRng(config.split.seed, {StableHash("select"), key++});
    if (!part->empty()) *part = SelectCores(*part, config.selection, rng);
  }
  return splits;
}

}  // namespace coremil
