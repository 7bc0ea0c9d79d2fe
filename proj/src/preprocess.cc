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

#include "coremil/preprocess.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace coremil {
namespace {

// Grid position counts use a small tolerance so that extents which are exact
// multiples of the stride in decimal (28 mm, 1 mm) are not lost to rounding.
constexpr double kGridEps = 1e-9;

int AxisPositions(double extent_mm, double roi_mm, double stride_mm) {
  if (extent_mm + kGridEps < roi_mm) return 0;
  return static_cast<int>(std::floor((extent_mm - roi_mm) / stride_mm + kGridEps)) + 1;
}

// Summed-area table with a zero border: sat(r, c) = mask pixels in [0,r)x[0,c).
std::vector<std::int64_t> SummedArea(const Mask& mask) {
  const int rows = mask.rows();
  const int cols = mask.cols();
  std::vector<std::int64_t> sat(static_cast<std::size_t>(rows + 1) * (cols + 1), 0);
  for (int r = 0; r < rows; ++r) {
    std::int64_t row_sum = 0;
    for (int c = 0; c < cols; ++c) {
      row_sum += mask(r, c) != 0 ? 1 : 0;
      sat[static_cast<std::size_t>(r + 1) * (cols + 1) + c + 1] =
          sat[static_cast<std::size_t>(r) * (cols + 1) + c + 1] + row_sum;
    }
  }
  return sat;
}

}  // namespace

void RfImage::Validate() const {
  if (samples.rows() < 2 || samples.cols() < 2) {
    throw InvalidArgument("RF image must have at least 2 rows and 2 columns");
  }
  if (!(depth_mm > 0.0) || !(width_mm > 0.0)) {
    throw InvalidArgument("RF image extents must be positive");
  }
  for (float v : samples.values()) {
    if (!std::isfinite(v)) throw InvalidArgument("RF image contains a non-finite sample");
  }
}

void RoiSpec::Validate() const {
  if (!(roi_size_mm > 0.0)) throw InvalidArgument("roi_size_mm must be positive");
  if (!(stride_mm > 0.0) || stride_mm > roi_size_mm) {
    throw InvalidArgument("stride_mm must lie in (0, roi_size_mm]");
  }
  if (!(overlap_threshold > 0.0) || overlap_threshold > 1.0) {
    throw InvalidArgument("overlap_threshold must lie in (0, 1]");
  }
  if (output_rows < 1 || output_cols < 1) {
    throw InvalidArgument("output size must be positive");
  }
}

GridShape RoiGridShape(double depth_mm, double width_mm, const RoiSpec& spec) {
  return {AxisPositions(depth_mm, spec.roi_size_mm, spec.stride_mm),
          AxisPositions(width_mm, spec.roi_size_mm, spec.stride_mm)};
}

RoiWindow GridWindow(int image_rows, int image_cols, double depth_mm,
                     double width_mm, const RoiSpec& spec, int axial_index,
                     int lateral_index) {
  const double axial_pitch = depth_mm / image_rows;
  const double lateral_pitch = width_mm / image_cols;
  RoiWindow w;
  w.axial_index = axial_index;
  w.lateral_index = lateral_index;
  w.axial_mm = axial_index * spec.stride_mm;
  w.lateral_mm = lateral_index * spec.stride_mm;
  w.rows = std::clamp(static_cast<int>(std::lround(spec.roi_size_mm / axial_pitch)), 1,
                      image_rows);
  w.cols = std::clamp(static_cast<int>(std::lround(spec.roi_size_mm / lateral_pitch)), 1,
                      image_cols);
  w.row0 = std::min(static_cast<int>(std::lround(w.axial_mm / axial_pitch)),
                    image_rows - w.rows);
  w.col0 = std::min(static_cast<int>(std::lround(w.lateral_mm / lateral_pitch)),
                    image_cols - w.cols);
  return w;
}

std::vector<RoiWindow> TileRois(const RfImage& image, const NeedleMask& mask,
                                const RoiSpec& spec) {
  spec.Validate();
  if (!image.samples.SameShape(mask.mask)) {
    throw AlignmentError("needle mask shape differs from RF image shape");
  }
  const int rows = image.samples.rows();
  const int cols = image.samples.cols();
  const GridShape shape = RoiGridShape(image.depth_mm, image.width_mm, spec);
  const std::vector<std::int64_t> sat = SummedArea(mask.mask);
  auto at = [&](int r, int c) { return sat[static_cast<std::size_t>(r) * (cols + 1) + c]; };

  std::vector<RoiWindow> out;
  for (int lat = 0; lat < shape.lateral; ++lat) {
    for (int ax = 0; ax < shape.axial; ++ax) {
      RoiWindow w = GridWindow(rows, cols, image.depth_mm, image.width_mm, spec, ax, lat);
      const std::int64_t inside = at(w.row0 + w.rows, w.col0 + w.cols) -
                                  at(w.row0, w.col0 + w.cols) -
                                  at(w.row0 + w.rows, w.col0) + at(w.row0, w.col0);
      w.overlap = static_cast<double>(inside) / (static_cast<double>(w.rows) * w.cols);
      if (w.overlap >= spec.overlap_threshold) out.push_back(w);
    }
  }
  return out;
}

Image ResizeRoi(const Image& window, int out_rows, int out_cols) {
  if (window.rows() == 0 || window.cols() == 0) {
    throw InvalidArgument("cannot resize a window with a zero dimension");
  }
  if (out_rows < 1 || out_cols < 1) throw InvalidArgument("output size must be positive");

  struct Tap {
    int lo;
    int hi;
    double frac;
  };
  auto taps = [](int in, int out) {
    std::vector<Tap> t(out);
    for (int i = 0; i < out; ++i) {
      const double src = (in == 1 || out == 1)
                             ? 0.0
                             : static_cast<double>(i) * (in - 1) / (out - 1);
      const int lo = std::min(static_cast<int>(std::floor(src)), in - 1);
      t[i] = {lo, std::min(lo + 1, in - 1), src - lo};
    }
    return t;
  };
  const std::vector<Tap> row_taps = taps(window.rows(), out_rows);
  const std::vector<Tap> col_taps = taps(window.cols(), out_cols);

  Image out(out_rows, out_cols);
  for (int i = 0; i < out_rows; ++i) {
    const Tap& rt = row_taps[i];
    for (int j = 0; j < out_cols; ++j) {
      const Tap& ct = col_taps[j];
      // a + f * (b - a) keeps constant inputs bit-exact.
      const double top = window(rt.lo, ct.lo) +
                         ct.frac * (static_cast<double>(window(rt.lo, ct.hi)) - window(rt.lo, ct.lo));
      const double bottom = window(rt.hi, ct.lo) +
                            ct.frac * (static_cast<double>(window(rt.hi, ct.hi)) - window(rt.hi, ct.lo));
      out(i, j) = static_cast<float>(top + rt.frac * (bottom - top));
    }
  }
  return out;
}

Image NormalizeRoi(const Image& roi) {
  Image out(roi.rows(), roi.cols());
  if (roi.empty()) return out;
  const auto values = roi.values();
  double mean = 0.0;
  for (float v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double var = 0.0;
  for (float v : values) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / static_cast<double>(values.size()));
  const double lo_bound = mean - 4.0 * sd;
  const double hi_bound = mean + 4.0 * sd;

  std::vector<double> clamped(values.size());
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < values.size(); ++i) {
    clamped[i] = std::clamp(static_cast<double>(values[i]), lo_bound, hi_bound);
    lo = std::min(lo, clamped[i]);
    hi = std::max(hi, clamped[i]);
  }
  auto dst = out.values();
  if (!(hi > lo)) {
    std::fill(dst.begin(), dst.end(), 0.5f);
    return out;
  }
  const double range = hi - lo;
  for (std::size_t i = 0; i < clamped.size(); ++i) {
    dst[i] = static_cast<float>((clamped[i] - lo) / range);
  }
  return out;
}

RoiBag BuildBag(const RfImage& image, const NeedleMask& mask, const RoiSpec& spec) {
  image.Validate();
  const std::vector<RoiWindow> windows = TileRois(image, mask, spec);
  if (windows.empty()) {
    throw EmptyBagError("core '" + image.core_id + "' has no ROI inside the needle trace");
  }
  RoiBag bag;
  bag.core_id = image.core_id;
  bag.rois.reserve(windows.size());
  bag.positions.reserve(windows.size());
  for (const RoiWindow& w : windows) {
    const Image window = image.samples.Crop(w.row0, w.col0, w.rows, w.cols);
    bag.rois.push_back(NormalizeRoi(ResizeRoi(window, spec.output_rows, spec.output_cols)));
    bag.positions.push_back({w.axial_mm, w.lateral_mm, w.axial_index, w.lateral_index});
  }
  return bag;
}

}  // namespace coremil
