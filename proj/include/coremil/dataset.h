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

#ifndef COREMIL_DATASET_H_
#define COREMIL_DATASET_H_

#include <filesystem>
#include <functional>
#include <vector>

#include <torch/torch.h>

#include "coremil/config.h"
#include "coremil/manifest.h"
#include "coremil/preprocess.h"
#include "coremil/splits.h"

namespace coremil {

// One biopsy core ready for the network.
struct CoreSample {
  ManifestRow meta;
  torch::Tensor rois;  // n x 1 x H x W, float32
  torch::Tensor grid;  // n x 2, int64 (axial_index, lateral_index)
  std::vector<RoiPosition> positions;

  int label() const { return meta.is_cancer() ? 1 : 0; }
  int64_t size() const { return rois.size(0); }
};
using CoreSet = std::vector<CoreSample>;

torch::Tensor RoisToTensor(const std::vector<Image>& rois);
CoreSample MakeCoreSample(const ManifestRow& meta, const RoiBag& bag);

using BagSource = std::function<RoiBag(const ManifestRow&)>;
CoreSet BuildCoreSet(const Manifest& manifest, const BagSource& source);

std::vector<int> Labels(const CoreSet& cores);

// Bags live at <dir>/bags/<core_id>.bag.
std::filesystem::path BagPath(const std::filesystem::path& data_dir, const std::string& core_id);
BagSource BagsFromDirectory(const std::filesystem::path& data_dir);

// Patient-exclusive split followed by core selection on every split. The
// selection stream of each split is derived from the split seed.
Splits SplitAndSelect(const Manifest& manifest, const RunConfig& config);

}  // namespace coremil

#endif  // COREMIL_DATASET_H_
