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

#ifndef COREMIL_AUGMENT_H_
#define COREMIL_AUGMENT_H_

#include <utility>

#include "coremil/grid.h"
#include "coremil/rng.h"

namespace coremil {

// Random-crop and flip augmentation for self-supervised views.
struct AugmentationPolicy {
  double crop_scale_min = 0.5;  // fraction of the ROI area kept by a crop
  double crop_scale_max = 1.0;
  double horizontal_flip_prob = 0.5;  // mirror along the lateral axis
  double vertical_flip_prob = 0.5;    // mirror along the axial axis

  void Validate() const;
};

struct CropBox {
  int row0 = 0;
  int col0 = 0;
  int rows = 0;
  int cols = 0;
};

// A box with the ROI's aspect ratio covering `scale` of its area (rounded to
// whole pixels), placed uniformly at random.
CropBox SampleCrop(int rows, int cols, double scale, Rng& rng);

Image FlipHorizontal(const Image& image);
Image FlipVertical(const Image& image);

// One augmented view, resized back to the input shape.
Image RandomView(const Image& roi, const AugmentationPolicy& policy, Rng& rng);

// Two independently drawn views (t, t') of the same ROI.
std::pair<Image, Image> Augment(const Image& roi, const AugmentationPolicy& policy, Rng& rng);

}  // namespace coremil

#endif  // COREMIL_AUGMENT_H_
