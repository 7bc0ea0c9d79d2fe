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

#ifndef COREMIL_CONTAINER_H_
#define COREMIL_CONTAINER_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "coremil/preprocess.h"

namespace coremil {

// Binary array container, one file per core. All integers and floats are
// little-endian.
//
//   offset  type        field
//   0       char[4]     magic "CMRF"
//   4       u32         format version (kContainerVersion)
//   8       u32         payload kind (ContainerKind)
//   12      u32         core_id byte length L
//   16      char[L]     core_id (UTF-8, no terminator)
//   16+L    f64         depth_mm  (0 for ROI bags)
//   24+L    f64         width_mm  (0 for ROI bags)
//   32+L    u32         array count N (1 for images and masks)
//   36+L    u32         rows
//   40+L    u32         cols
//   44+L    payload     N*rows*cols elements, row-major; f32 for RF images and
//                       ROI bags, u8 (0/1) for masks
//
// ROI positions travel in a sidecar CSV (see WritePositionsCsv).
inline constexpr std::uint32_t kContainerVersion = 1;

enum class ContainerKind : std::uint32_t {
  kRfImage = 1,
  kNeedleMask = 2,
  kRoiBag = 3,
};

void WriteRfImage(const std::filesystem::path& path, const RfImage& image);
RfImage ReadRfImage(const std::filesystem::path& path);

// The mask file carries the same core_id and extents as its RF image.
void WriteNeedleMask(const std::filesystem::path& path, const NeedleMask& mask,
                     const RfImage& geometry);
NeedleMask ReadNeedleMask(const std::filesystem::path& path);

// Writes <path> with the ROI arrays and <path>.positions.csv alongside.
void WriteRoiBag(const std::filesystem::path& path, const RoiBag& bag,
                 const std::string& config_hash = "");
RoiBag ReadRoiBag(const std::filesystem::path& path);

std::filesystem::path PositionsPath(const std::filesystem::path& bag_path);

// "# coremil-positions v1" header line, then
// index,axial_mm,lateral_mm,axial_index,lateral_index
void WritePositionsCsv(const std::filesystem::path& path,
                       const std::vector<RoiPosition>& positions,
                       const std::string& config_hash = "");
std::vector<RoiPosition> ReadPositionsCsv(const std::filesystem::path& path);

// Splits one CSV line on commas (no quoting; none of our fields need it).
std::vector<std::string> SplitCsvLine(const std::string& line);

// First line of every text artifact: "<tag>" or "<tag> config=<hash>".
std::string HeaderLine(const std::string& tag, const std::string& config_hash);
bool MatchesHeader(const std::string& line, const std::string& tag);

}  // namespace coremil

#endif  // COREMIL_CONTAINER_H_
