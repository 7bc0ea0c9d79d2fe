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

#include "coremil/container.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "coremil/errors.h"

namespace coremil {
namespace {

static_assert(std::endian::native == std::endian::little,
              "container I/O assumes a little-endian host");

constexpr char kMagic[4] = {'C', 'M', 'R', 'F'};
constexpr const char* kPositionsHeader = "# coremil-positions v1";

struct Header {
  ContainerKind kind{};
  std::string core_id;
  double depth_mm = 0.0;
  double width_mm = 0.0;
  std::uint32_t count = 0;
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
};

template <typename T>
void Put(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T Get(std::istream& in, const std::filesystem::path& path) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw FormatError("truncated container: " + path.string());
  return value;
}

std::ofstream OpenOut(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open for writing: " + path.string());
  return out;
}

void WriteHeader(std::ostream& out, const Header& h) {
  out.write(kMagic, 4);
  Put(out, kContainerVersion);
  Put(out, static_cast<std::uint32_t>(h.kind));
  Put(out, static_cast<std::uint32_t>(h.core_id.size()));
  out.write(h.core_id.data(), static_cast<std::streamsize>(h.core_id.size()));
  Put(out, h.depth_mm);
  Put(out, h.width_mm);
  Put(out, h.count);
  Put(out, h.rows);
  Put(out, h.cols);
}

Header ReadHeader(std::istream& in, const std::filesystem::path& path,
                  ContainerKind expected) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) {
    throw FormatError("not a coremil container: " + path.string());
  }
  const auto version = Get<std::uint32_t>(in, path);
  if (version != kContainerVersion) {
    throw FormatError(fmt::format("unsupported container version {} in {}", version,
                                  path.string()));
  }
  Header h;
  h.kind = static_cast<ContainerKind>(Get<std::uint32_t>(in, path));
  if (h.kind != expected) {
    throw FormatError(fmt::format("container {} holds kind {}, expected {}", path.string(),
                                  static_cast<std::uint32_t>(h.kind),
                                  static_cast<std::uint32_t>(expected)));
  }
  const auto id_len = Get<std::uint32_t>(in, path);
  if (id_len > 4096) throw FormatError("implausible core_id length in " + path.string());
  h.core_id.resize(id_len);
  in.read(h.core_id.data(), id_len);
  h.depth_mm = Get<double>(in, path);
  h.width_mm = Get<double>(in, path);
  h.count = Get<std::uint32_t>(in, path);
  h.rows = Get<std::uint32_t>(in, path);
  h.cols = Get<std::uint32_t>(in, path);
  if (!in) throw FormatError("truncated container: " + path.string());
  return h;
}

template <typename T>
void ReadPayload(std::istream& in, std::span<T> dst, const std::filesystem::path& path) {
  in.read(reinterpret_cast<char*>(dst.data()),
          static_cast<std::streamsize>(dst.size_bytes()));
  if (!in) throw FormatError("truncated payload: " + path.string());
}

std::ifstream OpenIn(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open: " + path.string());
  return in;
}

}  // namespace

void WriteRfImage(const std::filesystem::path& path, const RfImage& image) {
  std::ofstream out = OpenOut(path);
  WriteHeader(out, {ContainerKind::kRfImage, image.core_id, image.depth_mm, image.width_mm, 1,
                    static_cast<std::uint32_t>(image.samples.rows()),
                    static_cast<std::uint32_t>(image.samples.cols())});
  const auto v = image.samples.values();
  out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size_bytes()));
  if (!out) throw Error("write failed: " + path.string());
}

RfImage ReadRfImage(const std::filesystem::path& path) {
  std::ifstream in = OpenIn(path);
  const Header h = ReadHeader(in, path, ContainerKind::kRfImage);
  if (h.count != 1) throw FormatError("RF container must hold exactly one array");
  RfImage image;
  image.core_id = h.core_id;
  image.depth_mm = h.depth_mm;
  image.width_mm = h.width_mm;
  image.samples = Image(static_cast<int>(h.rows), static_cast<int>(h.cols));
  ReadPayload(in, image.samples.values(), path);
  return image;
}

void WriteNeedleMask(const std::filesystem::path& path, const NeedleMask& mask,
                     const RfImage& geometry) {
  std::ofstream out = OpenOut(path);
  WriteHeader(out, {ContainerKind::kNeedleMask, geometry.core_id, geometry.depth_mm,
                    geometry.width_mm, 1, static_cast<std::uint32_t>(mask.mask.rows()),
                    static_cast<std::uint32_t>(mask.mask.cols())});
  for (std::uint8_t v : mask.mask.values()) Put(out, static_cast<std::uint8_t>(v != 0));
  if (!out) throw Error("write failed: " + path.string());
}

NeedleMask ReadNeedleMask(const std::filesystem::path& path) {
  std::ifstream in = OpenIn(path);
  const Header h = ReadHeader(in, path, ContainerKind::kNeedleMask);
  if (h.count != 1) throw FormatError("mask container must hold exactly one array");
  NeedleMask mask{Mask(static_cast<int>(h.rows), static_cast<int>(h.cols))};
  ReadPayload(in, mask.mask.values(), path);
  return mask;
}

std::filesystem::path PositionsPath(const std::filesystem::path& bag_path) {
  std::filesystem::path p = bag_path;
  p += ".positions.csv";
  return p;
}

void WriteRoiBag(const std::filesystem::path& path, const RoiBag& bag,
                 const std::string& config_hash) {
  const std::uint32_t rows = bag.rois.empty() ? 0 : bag.rois.front().rows();
  const std::uint32_t cols = bag.rois.empty() ? 0 : bag.rois.front().cols();
  std::ofstream out = OpenOut(path);
  WriteHeader(out, {ContainerKind::kRoiBag, bag.core_id, 0.0, 0.0,
                    static_cast<std::uint32_t>(bag.rois.size()), rows, cols});
  for (const Image& roi : bag.rois) {
    if (static_cast<std::uint32_t>(roi.rows()) != rows ||
        static_cast<std::uint32_t>(roi.cols()) != cols) {
      throw InvalidArgument("all ROIs in a bag must share one shape");
    }
    const auto v = roi.values();
    out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size_bytes()));
  }
  if (!out) throw Error("write failed: " + path.string());
  WritePositionsCsv(PositionsPath(path), bag.positions, config_hash);
}

RoiBag ReadRoiBag(const std::filesystem::path& path) {
  std::ifstream in = OpenIn(path);
  const Header h = ReadHeader(in, path, ContainerKind::kRoiBag);
  RoiBag bag;
  bag.core_id = h.core_id;
  bag.rois.reserve(h.count);
  for (std::uint32_t i = 0; i < h.count; ++i) {
    Image roi(static_cast<int>(h.rows), static_cast<int>(h.cols));
    ReadPayload(in, roi.values(), path);
    bag.rois.push_back(std::move(roi));
  }
  bag.positions = ReadPositionsCsv(PositionsPath(path));
  if (bag.positions.size() != bag.rois.size()) {
    throw FormatError("position table length differs from bag size for " + path.string());
  }
  return bag;
}

void WritePositionsCsv(const std::filesystem::path& path,
                       const std::vector<RoiPosition>& positions,
                       const std::string& config_hash) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot open for writing: " + path.string());
  out << HeaderLine(kPositionsHeader, config_hash) << "\n";
  out << "index,axial_mm,lateral_mm,axial_index,lateral_index\n";
  for (std::size_t i = 0; i < positions.size(); ++i) {
    const RoiPosition& p = positions[i];
    out << fmt::format("{},{},{},{},{}\n", i, p.axial_mm, p.lateral_mm, p.axial_index,
                       p.lateral_index);
  }
}

std::vector<RoiPosition> ReadPositionsCsv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open: " + path.string());
  std::string line;
  if (!std::getline(in, line) || !MatchesHeader(line, kPositionsHeader)) {
    throw FormatError("missing positions header in " + path.string());
  }
  std::getline(in, line);  // column names
  std::vector<RoiPosition> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = SplitCsvLine(line);
    if (f.size() != 5) throw FormatError("bad positions row in " + path.string());
    out.push_back({std::stod(f[1]), std::stod(f[2]), std::stoi(f[3]), std::stoi(f[4])});
  }
  return out;
}

std::string HeaderLine(const std::string& tag, const std::string& config_hash) {
  return config_hash.empty() ? tag : tag + " config=" + config_hash;
}

bool MatchesHeader(const std::string& line, const std::string& tag) {
  return line == tag || line.starts_with(tag + " config=");
}

std::vector<std::string> SplitCsvLine(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

}  // namespace coremil
