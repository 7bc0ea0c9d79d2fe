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

#ifndef COREMIL_PREPROCESS_H_
#define COREMIL_PREPROCESS_H_

#include <string>
#include <vector>

#include "coremil/grid.h"

namespace coremil {

// Raw per-core RF frame. Rows are axial samples, columns lateral lines.
struct RfImage {
  Image samples;
  double depth_mm = 28.0;
  double width_mm = 46.0;
  std::string core_id;

  double axial_pitch_mm() const { return depth_mm / samples.rows(); }
  double lateral_pitch_mm() const { return width_mm / samples.cols(); }

  // Throws InvalidArgument unless the frame is at least 2x2, has positive
  // extents, and every sample is finite.
  void Validate() const;
};

// Needle-trace raster aligned with the RF pixel grid (nonzero = inside).
struct NeedleMask {
  Mask mask;
};

struct RoiSpec {
  double roi_size_mm = 5.0;
  double stride_mm = 1.0;
  double overlap_threshold = 0.66;
  int output_rows = 256;
  int output_cols = 256;

  void Validate() const;
};

// Number of stride positions along each axis for a frame of the given extent.
struct GridShape {
  int axial = 0;
  int lateral = 0;
  int count() const { return axial * lateral; }
};

GridShape RoiGridShape(double depth_mm, double width_mm, const RoiSpec& spec);

// One window of the regular ROI grid.
struct RoiWindow {
  int row0 = 0;
  int col0 = 0;
  int rows = 0;
  int cols = 0;
  int axial_index = 0;
  int lateral_index = 0;
  double axial_mm = 0.0;    // top-left anchor, axial
  double lateral_mm = 0.0;  // top-left anchor, lateral
  double overlap = 0.0;     // fraction of window pixels inside the mask
};

// Pixel rectangle of the grid window at (axial_index, lateral_index). The
// window size is roi_size_mm snapped to the nearest whole pixel count and its
// anchor is snapped to the nearest pixel, shifted inward if it would spill
// past the frame edge.
RoiWindow GridWindow(int image_rows, int image_cols, double depth_mm,
                     double width_mm, const RoiSpec& spec, int axial_index,
                     int lateral_index);

// All grid windows whose mask overlap is >= spec.overlap_threshold, in
// lateral-major order: sorted by lateral_index, then by axial_index.
// Throws AlignmentError when mask and image differ in shape.
std::vector<RoiWindow> TileRois(const RfImage& image, const NeedleMask& mask,
                                const RoiSpec& spec);

// Bilinear resize with corner-aligned sampling, so a same-size resize is the
// identity and constant inputs stay constant. Throws InvalidArgument on a
// window with a zero dimension or a non-positive output size.
Image ResizeRoi(const Image& window, int out_rows, int out_cols);

// Clamps values to mean +/- 4 standard deviations (population statistics of
// this ROI only) and min-max rescales to [0, 1]. A constant ROI maps to 0.5.
Image NormalizeRoi(const Image& roi);

struct RoiPosition {
  double axial_mm = 0.0;
  double lateral_mm = 0.0;
  int axial_index = 0;
  int lateral_index = 0;
};

struct RoiBag {
  std::vector<Image> rois;
  std::vector<RoiPosition> positions;
  std::string core_id;

  std::size_t size() const { return rois.size(); }
};

// tile -> resize -> normalize. Throws EmptyBagError when no window qualifies.
RoiBag BuildBag(const RfImage& image, const NeedleMask& mask,
                const RoiSpec& spec);

}  // namespace coremil

#endif  // COREMIL_PREPROCESS_H_
