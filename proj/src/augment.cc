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

#include "coremil/augment.h"

#include <algorithm>
#include <cmath>

#include "coremil/errors.h"
#include "coremil/preprocess.h"

namespace coremil {

void AugmentationPolicy::Validate() const {
  if (!(crop_scale_min > 0.0) || crop_scale_max > 1.0 || crop_scale_min > crop_scale_max) {
    throw InvalidArgument("crop scale range must satisfy 0 < min <= max <= 1");
  }
  for (double p : {horizontal_flip_prob, vertical_flip_prob}) {
    if (p < 0.0 || p > 1.0) throw InvalidArgument("flip probabilities must lie in [0, 1]");
  }
}

CropBox SampleCrop(int rows, int cols, double scale, Rng& rng) {
  const double side = std::sqrt(scale);
  CropBox box;
  box.rows = std::clamp(static_cast<int>(std::lround(rows * side)), 1, rows);
  box.cols = std::clamp(static_cast<int>(std::lround(cols * side)), 1, cols);
  box.row0 = std::min(rows - box.rows,
                      static_cast<int>(Uniform01(rng) * (rows - box.rows + 1)));
  box.col0 = std::min(cols - box.cols,
                      static_cast<int>(Uniform01(rng) * (cols - box.cols + 1)));
  return box;
}

Image FlipHorizontal(const Image& image) {
  Image out(image.rows(), image.cols());
  for (int r = 0; r < image.rows(); ++r) {
    for (int c = 0; c < image.cols(); ++c) out(r, c) = image(r, image.cols() - 1 - c);
  }
  return out;
}

Image FlipVertical(const Image& image) {
  Image out(image.rows(), image.cols());
  for (int r = 0; r < image.rows(); ++r) {
    for (int c = 0; c < image.cols(); ++c) out(r, c) = image(image.rows() - 1 - r, c);
  }
  return out;
}

Image RandomView(const Image& roi, const AugmentationPolicy& policy, Rng& rng) {
  const double scale =
      policy.crop_scale_min + Uniform01(rng) * (policy.crop_scale_max - policy.crop_scale_min);
  const CropBox box = SampleCrop(roi.rows(), roi.cols(), scale, rng);
  const bool hflip = Uniform01(rng) < policy.horizontal_flip_prob;
  const bool vflip = Uniform01(rng) < policy.vertical_flip_prob;
  Image view = ResizeRoi(roi.Crop(box.row0, box.col0, box.rows, box.cols), roi.rows(), roi.cols());
  if (hflip) view = FlipHorizontal(view);
  if (vflip) view = FlipVertical(view);
  return view;
}

std::pair<Image, Image> Augment(const Image& roi, const AugmentationPolicy& policy, Rng& rng) {
  policy.Validate();
  Image first = RandomView(roi, policy, rng);
  Image second = RandomView(roi, policy, rng);
  return {std::move(first), std::move(second)};
}

}  // namespace coremil
