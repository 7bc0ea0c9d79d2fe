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

#include "coremil/manifest.h"

#include <fstream>
#include <map>
#include <set>

#include <fmt/format.h>

#include "coremil/container.h"
#include "coremil/errors.h"

namespace coremil {
namespace {
constexpr const char* kManifestHeader = "# coremil-manifest v1";
constexpr const char* kManifestColumns =
    "core_id,patient_id,center_id,label,involvement,gleason_surrogate,rf_path,mask_path";
}  // namespace

CoreLabel ParseLabel(const std::string& text) {
  if (text == "cancer" || text == "1") return CoreLabel::kCancer;
  if (text == "benign" || text == "0") return CoreLabel::kBenign;
  throw InvalidArgument("unknown label '" + text + "'");
}

void WriteManifestCsv(const std::filesystem::path& path, const Manifest& manifest,
                      const std::string& config_hash) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot open for writing: " + path.string());
  out << HeaderLine(kManifestHeader, config_hash) << "\n" << kManifestColumns << "\n";
  for (const ManifestRow& r : manifest) {
    out << fmt::format("{},{},{},{},{},{},{},{}\n", r.core_id, r.patient_id, r.center_id,
                       LabelName(r.label), r.involvement, r.gleason_surrogate, r.rf_path,
                       r.mask_path);
  }
}

Manifest ReadManifestCsv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open manifest: " + path.string());
  std::string line;
  if (!std::getline(in, line) || !MatchesHeader(line, kManifestHeader)) {
    throw FormatError("missing or unsupported manifest header in " + path.string());
  }
  if (!std::getline(in, line) || line != kManifestColumns) {
    throw FormatError("unexpected manifest columns in " + path.string());
  }
  Manifest out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = SplitCsvLine(line);
    if (f.size() != 8) throw FormatError("bad manifest row: " + line);
    ManifestRow r;
    r.core_id = f[0];
    r.patient_id = f[1];
    r.center_id = f[2];
    r.label = ParseLabel(f[3]);
    r.involvement = std::stod(f[4]);
    r.gleason_surrogate = std::stoi(f[5]);
    r.rf_path = f[6];
    r.mask_path = f[7];
    out.push_back(std::move(r));
  }
  ValidateManifest(out);
  return out;
}

void ValidateManifest(const Manifest& manifest) {
  std::set<std::string> ids;
  std::map<std::string, std::string> center_of;
  for (const ManifestRow& r : manifest) {
    if (!ids.insert(r.core_id).second) {
      throw InvalidArgument("duplicate core_id " + r.core_id);
    }
    auto [it, inserted] = center_of.emplace(r.patient_id, r.center_id);
    if (!inserted && it->second != r.center_id) {
      throw InvalidArgument("patient " + r.patient_id + " appears in two centers");
    }
  }
}

}  // namespace coremil
