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

#ifndef COREMIL_PHANTOM_H_
#define COREMIL_PHANTOM_H_

#include <cstdint>
#include <filesystem>
#include <vector>

#include "coremil/grid.h"
#include "coremil/manifest.h"
#include "coremil/preprocess.h"

namespace coremil {

// Speckle texture of one tissue class. The RF field is sparse white noise
// (a scatterer at each pixel with probability scatterer_density) convolved
// axially with a Gaussian-windowed pulse whose envelope sigma is
// correlation_length_mm, scaled by amplitude_scale.
struct TextureParams {
  double scatterer_density = 0.5;
  double amplitude_scale = 1.0;
  double correlation_length_mm = 0.2;

  friend bool operator==(const TextureParams&, const TextureParams&) = default;
};

// Rectangular needle trace. The centre line passes through the anchor at
// angle_deg from the lateral axis (positive angles go deeper with lateral
// position).
struct NeedleBand {
  double angle_deg = 6.0;
  double width_mm = 5.5;
  double length_mm = 17.0;
  double anchor_axial_mm = 14.0;
  double anchor_lateral_mm = 23.0;
  // Per-core uniform jitter of the anchor (both axes) and the angle.
  double anchor_jitter_mm = 1.5;
  double angle_jitter_deg = 4.0;
};

struct PhantomConfig {
  int image_rows = 224;  // 8 px/mm axially at the default depth
  int image_cols = 184;  // 4 px/mm laterally at the default width
  double depth_mm = 28.0;
  double width_mm = 46.0;
  TextureParams benign{0.5, 1.0, 0.20};
  TextureParams cancer{0.15, 1.6, 0.35};
  NeedleBand needle;
  double noise_level = 0.2;
  double pulse_wavelength_mm = 0.5;
  // Cancer texture of a core is benign + contrast * (cancer - benign), with
  // contrast drawn uniformly from [min_cancer_contrast, 1].
  double min_cancer_contrast = 0.6;
  // Both textures of a core have their correlation length scaled by a factor
  // drawn uniformly from [1 - core_variation, 1 + core_variation].
  double core_variation = 0.0;
  // Cancer paint extends this far beyond the needle band on each side.
  double cancer_margin_mm = 0.0;
  int n_centers = 5;
  std::uint64_t seed = 7;

  void Validate() const;
};

struct SyntheticCore {
  RfImage image;
  NeedleMask mask;
  CoreLabel label = CoreLabel::kBenign;
  double involvement = 0.0;
  int gleason_surrogate = 6;
  double contrast = 0.0;
  Mask cancer_region;  // pixel raster of painted cancer texture
  // Per ROI grid position (axial x lateral): 1 when more than half of the
  // window's pixels are painted cancer.
  Mask roi_truth;
};

// Involvement must be 0 exactly when the label is benign.
SyntheticCore GenerateCore(const PhantomConfig& config, const RoiSpec& roi,
                           CoreLabel label, double involvement,
                           std::uint64_t rng_seed, const std::string& core_id = "core");

// Gleason surrogate grade: 6 for benign; 7..10 for cancer, non-decreasing in
// both involvement (over [0.4, 1]) and contrast.
int GleasonSurrogate(CoreLabel label, double involvement, double contrast,
                     double min_contrast);

struct DatasetSpec {
  int n_patients = 100;
  int cores_per_patient = 10;
  double cancer_rate = 0.4;
  std::uint64_t seed = 7;
};

struct SyntheticDataset {
  Manifest manifest;
  std::vector<SyntheticCore> cores;  // parallel to manifest
};

// Core k (patient k / cores_per_patient) draws everything from the stream
// DeriveSeed(seed, {k}). Patients go to centers round-robin. Cancer
// involvement is uniform on (0.4, 1.0].
SyntheticDataset GenerateDataset(const DatasetSpec& spec, const PhantomConfig& config,
                                 const RoiSpec& roi);

// Writes cores/<core_id>.rf, cores/<core_id>.mask and manifest.csv under dir.
void WriteDataset(const std::filesystem::path& dir, const SyntheticDataset& dataset,
                  const std::string& config_hash = "");

}  // namespace coremil

#endif  // COREMIL_PHANTOM_H_
