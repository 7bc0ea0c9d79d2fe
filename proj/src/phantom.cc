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

#include "coremil/phantom.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "coremil/container.h"
#include "coremil/errors.h"
#include "coremil/rng.h"

namespace coremil {
namespace {

TextureParams Blend(const TextureParams& a, const TextureParams& b, double t) {
  return {a.scatterer_density + t * (b.scatterer_density - a.scatterer_density),
          a.amplitude_scale + t * (b.amplitude_scale - a.amplitude_scale),
          a.correlation_length_mm + t * (b.correlation_length_mm - a.correlation_length_mm)};
}

// Unit-energy axial pulse: Gaussian envelope times a carrier.
std::vector<double> PulseKernel(double sigma_px, double wavelength_px) {
  const int half = static_cast<int>(std::ceil(3.0 * sigma_px));
  std::vector<double> h(2 * half + 1);
  double energy = 0.0;
  for (int k = -half; k <= half; ++k) {
    const double v = std::exp(-0.5 * k * k / (sigma_px * sigma_px)) *
                     std::cos(2.0 * std::numbers::pi * k / wavelength_px);
    h[k + half] = v;
    energy += v * v;
  }
  const double norm = 1.0 / std::sqrt(energy);
  for (double& v : h) v *= norm;
  return h;
}

Image SpeckleField(int rows, int cols, double axial_pitch_mm, const TextureParams& t,
                   double wavelength_mm, Rng& rng) {
  const double density = std::clamp(t.scatterer_density, 1e-6, 1.0);
  const double gain = 1.0 / std::sqrt(density);
  std::vector<double> scatter(static_cast<std::size_t>(rows) * cols, 0.0);
  for (double& s : scatter) {
    const bool hit = Uniform01(rng) < density;
    const double g = Gaussian(rng);
    if (hit) s = g * gain;
  }
  const std::vector<double> h =
      PulseKernel(std::max(0.3, t.correlation_length_mm / axial_pitch_mm),
                  std::max(2.0, wavelength_mm / axial_pitch_mm));
  const int half = static_cast<int>(h.size() / 2);
  Image field(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      double acc = 0.0;
      for (int k = -half; k <= half; ++k) {
        const int src = r - k;
        if (src < 0 || src >= rows) continue;
        acc += h[k + half] * scatter[static_cast<std::size_t>(src) * cols + c];
      }
      field(r, c) = static_cast<float>(t.amplitude_scale * acc);
    }
  }
  return field;
}

}  // namespace

void PhantomConfig::Validate() const {
  if (image_rows < 2 || image_cols < 2) throw InvalidArgument("phantom image too small");
  if (!(depth_mm > 0) || !(width_mm > 0)) throw InvalidArgument("phantom extents must be positive");
  if (benign == cancer) {
    throw InvalidArgument("benign and cancer textures must differ in at least one parameter");
  }
  if (!(noise_level >= 0)) throw InvalidArgument("noise_level must be >= 0");
  for (const TextureParams* t : {&benign, &cancer}) {
    if (!(t->scatterer_density > 0) || t->scatterer_density > 1) {
      throw InvalidArgument("scatterer_density must lie in (0, 1]");
    }
    if (!(t->correlation_length_mm > 0)) throw InvalidArgument("correlation length must be positive");
  }
  if (min_cancer_contrast < 0 || min_cancer_contrast > 1) {
    throw InvalidArgument("min_cancer_contrast must lie in [0, 1]");
  }
  if (core_variation < 0 || core_variation >= 1) {
    throw InvalidArgument("core_variation must lie in [0, 1)");
  }
  if (n_centers < 1) throw InvalidArgument("n_centers must be >= 1");
  if (!(needle.width_mm > 0) || !(needle.length_mm > 0)) {
    throw InvalidArgument("needle band must have positive width and length");
  }
}

int GleasonSurrogate(CoreLabel label, double involvement, double contrast,
                     double min_contrast) {
  if (label == CoreLabel::kBenign) return 6;
  const double inv_score = std::clamp((involvement - 0.4) / 0.6, 0.0, 1.0);
  const double contrast_score =
      min_contrast >= 1.0 ? 1.0 : std::clamp((contrast - min_contrast) / (1.0 - min_contrast), 0.0, 1.0);
  const double score = 0.5 * inv_score + 0.5 * contrast_score;
  return 7 + std::min(3, static_cast<int>(std::floor(4.0 * score)));
}

SyntheticCore GenerateCore(const PhantomConfig& config, const RoiSpec& roi, CoreLabel label,
                           double involvement, std::uint64_t rng_seed,
                           const std::string& core_id) {
  config.Validate();
  roi.Validate();
  if (!(involvement >= 0.0 && involvement <= 1.0)) {
    throw InvalidArgument("involvement must lie in [0, 1]");
  }
  if ((label == CoreLabel::kBenign) != (involvement == 0.0)) {
    throw InvalidArgument("involvement must be 0 exactly when the core is benign");
  }
  Rng rng(rng_seed);
  const int rows = config.image_rows;
  const int cols = config.image_cols;
  const double axial_pitch = config.depth_mm / rows;
  const double lateral_pitch = config.width_mm / cols;

  // Per-core draws, in a fixed order.
  const NeedleBand& nb = config.needle;
  const double anchor_ax = nb.anchor_axial_mm + (2 * Uniform01(rng) - 1) * nb.anchor_jitter_mm;
  const double anchor_lat = nb.anchor_lateral_mm + (2 * Uniform01(rng) - 1) * nb.anchor_jitter_mm;
  const double angle =
      (nb.angle_deg + (2 * Uniform01(rng) - 1) * nb.angle_jitter_deg) * std::numbers::pi / 180.0;
  const double variation = 1.0 + (2 * Uniform01(rng) - 1) * config.core_variation;
  const double contrast =
      label == CoreLabel::kCancer
          ? config.min_cancer_contrast + Uniform01(rng) * (1.0 - config.min_cancer_contrast)
          : 0.0;
  const double segment_start = Uniform01(rng) * (1.0 - involvement) * nb.length_mm;

  TextureParams benign_tex = config.benign;
  TextureParams cancer_tex = Blend(config.benign, config.cancer, contrast);
  benign_tex.correlation_length_mm *= variation;
  cancer_tex.correlation_length_mm *= variation;

  const Image benign_field =
      SpeckleField(rows, cols, axial_pitch, benign_tex, config.pulse_wavelength_mm, rng);
  const Image cancer_field =
      label == CoreLabel::kCancer
          ? SpeckleField(rows, cols, axial_pitch, cancer_tex, config.pulse_wavelength_mm, rng)
          : Image();

  SyntheticCore core;
  core.label = label;
  core.involvement = involvement;
  core.contrast = contrast;
  core.gleason_surrogate =
      GleasonSurrogate(label, involvement, contrast, config.min_cancer_contrast);
  core.mask.mask = Mask(rows, cols, 0);
  core.cancer_region = Mask(rows, cols, 0);
  core.image.core_id = core_id;
  core.image.depth_mm = config.depth_mm;
  core.image.width_mm = config.width_mm;
  core.image.samples = Image(rows, cols);

  // Along-needle unit vector u = (sin, cos) in (axial, lateral); normal n.
  const double ua = std::sin(angle), ul = std::cos(angle);
  const double half_len = 0.5 * nb.length_mm;
  const double half_width = 0.5 * nb.width_mm;
  const double seg_lo = -half_len + segment_start;
  const double seg_hi = seg_lo + involvement * nb.length_mm;
  for (int r = 0; r < rows; ++r) {
    const double y = (r + 0.5) * axial_pitch - anchor_ax;
    for (int c = 0; c < cols; ++c) {
      const double x = (c + 0.5) * lateral_pitch - anchor_lat;
      const double along = y * ua + x * ul;
      const double perp = std::abs(y * ul - x * ua);
      const bool in_band = std::abs(along) <= half_len && perp <= half_width;
      const bool cancer = label == CoreLabel::kCancer && along >= seg_lo && along <= seg_hi &&
                          perp <= half_width + config.cancer_margin_mm;
      core.mask.mask(r, c) = in_band ? 1 : 0;
      core.cancer_region(r, c) = cancer ? 1 : 0;
      const double noise = config.noise_level * Gaussian(rng);
      core.image.samples(r, c) =
          static_cast<float>((cancer ? cancer_field(r, c) : benign_field(r, c)) + noise);
    }
  }

  const GridShape shape = RoiGridShape(config.depth_mm, config.width_mm, roi);
  core.roi_truth = Mask(shape.axial, shape.lateral, 0);
  for (int ax = 0; ax < shape.axial; ++ax) {
    for (int lat = 0; lat < shape.lateral; ++lat) {
      const RoiWindow w =
          GridWindow(rows, cols, config.depth_mm, config.width_mm, roi, ax, lat);
      long cancer = 0;
      for (int r = w.row0; r < w.row0 + w.rows; ++r) {
        for (int c = w.col0; c < w.col0 + w.cols; ++c) cancer += core.cancer_region(r, c);
      }
      core.roi_truth(ax, lat) = 2 * cancer > static_cast<long>(w.rows) * w.cols ? 1 : 0;
    }
  }
  return core;
}

SyntheticDataset GenerateDataset(const DatasetSpec& spec, const PhantomConfig& config,
                                 const RoiSpec& roi) {
  if (spec.n_patients < 1 || spec.cores_per_patient < 1) {
    throw InvalidArgument("patient and core counts must be >= 1");
  }
  if (spec.cancer_rate < 0 || spec.cancer_rate > 1) {
    throw InvalidArgument("cancer_rate must lie in [0, 1]");
  }
  SyntheticDataset ds;
  const int total = spec.n_patients * spec.cores_per_patient;
  ds.manifest.reserve(total);
  ds.cores.reserve(total);
  for (int k = 0; k < total; ++k) {
    const int patient = k / spec.cores_per_patient;
    const int slot = k % spec.cores_per_patient;
    Rng rng = MakeRng(spec.seed, {static_cast<std::uint64_t>(k)});
    const bool cancer = Uniform01(rng) < spec.cancer_rate;
    const double involvement = cancer ? 1.0 - 0.6 * Uniform01(rng) : 0.0;
    ManifestRow row;
    row.core_id = fmt::format("P{:04d}-C{:02d}", patient, slot);
    row.patient_id = fmt::format("P{:04d}", patient);
    row.center_id = fmt::format("center{}", patient % config.n_centers);
    row.label = cancer ? CoreLabel::kCancer : CoreLabel::kBenign;
    row.involvement = involvement;
    row.rf_path = "cores/" + row.core_id + ".rf";
    row.mask_path = "cores/" + row.core_id + ".mask";
    SyntheticCore core = GenerateCore(config, roi, row.label, involvement,
                                      DeriveSeed(spec.seed, {static_cast<std::uint64_t>(k), 1}),
                                      row.core_id);
    row.gleason_surrogate = core.gleason_surrogate;
    ds.manifest.push_back(std::move(row));
    ds.cores.push_back(std::move(core));
  }
  return ds;
}

void WriteDataset(const std::filesystem::path& dir, const SyntheticDataset& dataset,
                  const std::string& config_hash) {
  std::filesystem::create_directories(dir / "cores");
  for (std::size_t i = 0; i < dataset.cores.size(); ++i) {
    const ManifestRow& row = dataset.manifest[i];
    const SyntheticCore& core = dataset.cores[i];
    WriteRfImage(dir / row.rf_path, core.image);
    WriteNeedleMask(dir / row.mask_path, core.mask, core.image);
  }
  WriteManifestCsv(dir / "manifest.csv", dataset.manifest, config_hash);
}

}  // namespace coremil
