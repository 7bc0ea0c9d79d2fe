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

#ifndef COREMIL_MANIFEST_H_
#define COREMIL_MANIFEST_H_

#include <filesystem>
#include <string>
#include <vector>

namespace coremil {

enum class CoreLabel : int { kBenign = 0, kCancer = 1 };

inline const char* LabelName(CoreLabel label) {
  return label == CoreLabel::kCancer ? "cancer" : "benign";
}
CoreLabel ParseLabel(const std::string& text);

// One biopsy core. A patient belongs to exactly one center.
struct ManifestRow {
  std::string core_id;
  std::string patient_id;
  std::string center_id;
  CoreLabel label = CoreLabel::kBenign;
  double involvement = 0.0;
  int gleason_surrogate = 6;
  std::string rf_path;    // relative to the manifest directory
  std::string mask_path;  // relative to the manifest directory

  bool is_cancer() const { return label == CoreLabel::kCancer; }
};

using Manifest = std::vector<ManifestRow>;

// "# coremil-manifest v1" header line, then
// core_id,patient_id,center_id,label,involvement,gleason_surrogate,rf_path,mask_path
void WriteManifestCsv(const std::filesystem::path& path, const Manifest& manifest,
                      const std::string& config_hash = "");
Manifest ReadManifestCsv(const std::filesystem::path& path);

// Throws InvalidArgument on duplicate core ids or a patient seen in two centers.
void ValidateManifest(const Manifest& manifest);

}  // namespace coremil

#endif  // COREMIL_MANIFEST_H_
