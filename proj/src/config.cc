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

#include "coremil/config.h"

#include <fstream>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>
#include <fmt/ranges.h>
#include <openssl/evp.h>

#include "coremil/errors.h"

namespace coremil {
namespace {

namespace pt = boost::property_tree;

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

// Text <-> value conversions for each field type used in RunConfig.
std::string Format(double v) { return fmt::format("{}", v); }
std::string Format(int v) { return std::to_string(v); }
std::string Format(std::uint64_t v) { return std::to_string(v); }
std::string Format(bool v) { return v ? "true" : "false"; }
std::string Format(const std::string& v) { return v; }
std::string Format(const std::vector<int>& v) { return fmt::format("{}", fmt::join(v, ",")); }
std::string Format(SplitMode m) {
  return m == SplitMode::kSeedOnly ? "seed_only" : "validation_fold";
}

void Parse(const std::string& s, double& v) {
  std::size_t used = 0;
  v = std::stod(s, &used);
  if (used != s.size()) throw std::invalid_argument(s);
}
void Parse(const std::string& s, int& v) {
  std::size_t used = 0;
  v = std::stoi(s, &used);
  if (used != s.size()) throw std::invalid_argument(s);
}
void Parse(const std::string& s, std::uint64_t& v) {
  std::size_t used = 0;
  v = std::stoull(s, &used);
  if (used != s.size()) throw std::invalid_argument(s);
}
void Parse(const std::string& s, bool& v) {
  if (s == "true" || s == "1") {
    v = true;
  } else if (s == "false" || s == "0") {
    v = false;
  } else {
    throw std::invalid_argument(s);
  }
}
void Parse(const std::string& s, std::string& v) { v = s; }
void Parse(const std::string& s, std::vector<int>& v) {
  v.clear();
  std::istringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    int x = 0;
    Parse(Trim(item), x);
    v.push_back(x);
  }
}
void Parse(const std::string& s, SplitMode& m) {
  if (s == "seed_only") {
    m = SplitMode::kSeedOnly;
  } else if (s == "validation_fold") {
    m = SplitMode::kValidationFold;
  } else {
    throw std::invalid_argument(s);
  }
}

// Calls visit(section, key, field) for every configurable field, in the
// canonical order.
template <typename C, typename V>
void VisitFields(C& c, V&& visit) {
  visit("run", "seed", c.seed);
  visit("run", "output_dir", c.output_dir);
  visit("run", "threshold", c.threshold);

  visit("roi", "roi_size_mm", c.roi.roi_size_mm);
  visit("roi", "stride_mm", c.roi.stride_mm);
  visit("roi", "overlap_threshold", c.roi.overlap_threshold);
  visit("roi", "output_rows", c.roi.output_rows);
  visit("roi", "output_cols", c.roi.output_cols);

  auto& p = c.phantom;
  visit("phantom", "image_rows", p.image_rows);
  visit("phantom", "image_cols", p.image_cols);
  visit("phantom", "depth_mm", p.depth_mm);
  visit("phantom", "width_mm", p.width_mm);
  visit("phantom", "benign_density", p.benign.scatterer_density);
  visit("phantom", "benign_amplitude", p.benign.amplitude_scale);
  visit("phantom", "benign_correlation_mm", p.benign.correlation_length_mm);
  visit("phantom", "cancer_density", p.cancer.scatterer_density);
  visit("phantom", "cancer_amplitude", p.cancer.amplitude_scale);
  visit("phantom", "cancer_correlation_mm", p.cancer.correlation_length_mm);
  visit("phantom", "needle_angle_deg", p.needle.angle_deg);
  visit("phantom", "needle_width_mm", p.needle.width_mm);
  visit("phantom", "needle_length_mm", p.needle.length_mm);
  visit("phantom", "needle_anchor_axial_mm", p.needle.anchor_axial_mm);
  visit("phantom", "needle_anchor_lateral_mm", p.needle.anchor_lateral_mm);
  visit("phantom", "needle_anchor_jitter_mm", p.needle.anchor_jitter_mm);
  visit("phantom", "needle_angle_jitter_deg", p.needle.angle_jitter_deg);
  visit("phantom", "noise_level", p.noise_level);
  visit("phantom", "pulse_wavelength_mm", p.pulse_wavelength_mm);
  visit("phantom", "min_cancer_contrast", p.min_cancer_contrast);
  visit("phantom", "core_variation", p.core_variation);
  visit("phantom", "cancer_margin_mm", p.cancer_margin_mm);
  visit("phantom", "n_centers", p.n_centers);

  visit("dataset", "n_patients", c.dataset.n_patients);
  visit("dataset", "cores_per_patient", c.dataset.cores_per_patient);
  visit("dataset", "cancer_rate", c.dataset.cancer_rate);

  visit("backbone", "stem_channels", c.backbone.stem_channels);
  visit("backbone", "stem_kernel", c.backbone.stem_kernel);
  visit("backbone", "stem_stride", c.backbone.stem_stride);
  visit("backbone", "stage_channels", c.backbone.stage_channels);
  visit("backbone", "blocks_per_stage", c.backbone.blocks_per_stage);
  visit("backbone", "feature_dim", c.backbone.feature_dim);
  visit("backbone", "norm_groups", c.backbone.norm_groups);

  visit("projector", "widths", c.projector.widths);

  visit("augment", "crop_scale_min", c.augment.crop_scale_min);
  visit("augment", "crop_scale_max", c.augment.crop_scale_max);
  visit("augment", "horizontal_flip_prob", c.augment.horizontal_flip_prob);
  visit("augment", "vertical_flip_prob", c.augment.vertical_flip_prob);

  visit("vicreg", "lambda", c.vicreg.lambda);
  visit("vicreg", "mu", c.vicreg.mu);
  visit("vicreg", "nu", c.vicreg.nu);
  visit("vicreg", "gamma", c.vicreg.gamma);
  visit("vicreg", "epsilon", c.vicreg.epsilon);

  visit("ssl", "epochs", c.ssl.epochs);
  visit("ssl", "batch_size", c.ssl.batch_size);
  visit("ssl", "warmup_epochs", c.ssl.warmup_epochs);
  visit("ssl", "peak_lr", c.ssl.peak_lr);
  visit("ssl", "weight_decay", c.ssl.weight_decay);
  visit("ssl", "eval_every", c.ssl.eval_every);
  visit("ssl", "rois_per_core", c.ssl.rois_per_core);
  visit("ssl", "probe_rois_per_core", c.ssl.probe_rois_per_core);

  visit("transformer", "blocks", c.transformer.blocks);
  visit("transformer", "heads", c.transformer.heads);
  visit("transformer", "dim", c.transformer.dim);
  visit("transformer", "mlp_dim", c.transformer.mlp_dim);
  visit("transformer", "input_dim", c.transformer.input_dim);
  visit("transformer", "num_classes", c.transformer.num_classes);
  visit("transformer", "roi_dropout", c.transformer.roi_dropout);
  visit("transformer", "grid_axial", c.transformer.grid_axial);
  visit("transformer", "grid_lateral", c.transformer.grid_lateral);

  visit("stage2", "epochs", c.stage2.epochs);
  visit("stage2", "transformer_lr", c.stage2.transformer_lr);
  visit("stage2", "transformer_warmup_epochs", c.stage2.transformer_warmup_epochs);
  visit("stage2", "backbone_lr", c.stage2.backbone_lr);
  visit("stage2", "backbone_warmup_epochs", c.stage2.backbone_warmup_epochs);
  visit("stage2", "cores_per_batch", c.stage2.cores_per_batch);
  visit("stage2", "weight_decay", c.stage2.weight_decay);

  visit("split", "train", c.split.train);
  visit("split", "val", c.split.val);
  visit("split", "test", c.split.test);
  visit("split", "mode", c.split.mode);
  visit("split", "n_folds", c.split.n_folds);
  visit("split", "fold", c.split.fold);

  visit("selection", "min_involvement", c.selection.min_involvement);
  visit("selection", "benign_match", c.selection.benign_match);

  visit("baseline", "roi_batch_size", c.baseline.roi_batch_size);
  visit("baseline", "mil_hidden", c.baseline.mil_hidden);
  visit("baseline", "scratch_backbone_lr", c.baseline.scratch_backbone_lr);
}

std::string Sha256Hex(const std::string& text) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(text.data(), text.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 computation failed");
  }
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

void ApplyOverride(pt::ptree& tree, const std::string& assignment) {
  const auto eq = assignment.find('=');
  const auto dot = assignment.find('.');
  if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
    throw InvalidArgument("override must look like section.key=value: " + assignment);
  }
  const std::string section = Trim(assignment.substr(0, dot));
  const std::string key = Trim(assignment.substr(dot + 1, eq - dot - 1));
  tree.put(pt::ptree::path_type(section + "/" + key, '/'), Trim(assignment.substr(eq + 1)));
}

RunConfig FromTree(const pt::ptree& tree) {
  RunConfig config;
  std::set<std::string> known;
  VisitFields(config, [&](const char* section, const char* key, auto& field) {
    const std::string path = std::string(section) + "/" + key;
    known.insert(path);
    const auto value = tree.get_optional<std::string>(pt::ptree::path_type(path, '/'));
    if (!value) return;
    try {
      Parse(Trim(*value), field);
    } catch (const std::exception&) {
      throw InvalidArgument(fmt::format("bad value '{}' for {}.{}", *value, section, key));
    }
  });
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) {
      throw InvalidArgument("config key outside any section: " + section);
    }
    for (const auto& [key, _] : body) {
      if (!known.contains(section + "/" + key)) {
        throw InvalidArgument(fmt::format("unknown config key {}.{}", section, key));
      }
    }
  }
  config.Finalize();
  return config;
}

}  // namespace

void BackboneConfig::Validate() const {
  if (stage_channels.size() != 4) throw InvalidArgument("backbone needs exactly 4 stages");
  if (stem_kernel < 1 || stem_stride < 1 || stem_stride > stem_kernel) {
    throw InvalidArgument("stem needs kernel >= stride >= 1");
  }
  if (stem_channels < 1 || blocks_per_stage < 1 || feature_dim < 1 || norm_groups < 1) {
    throw InvalidArgument("backbone sizes must be positive");
  }
  for (int c : stage_channels) {
    if (c < 1 || c % norm_groups != 0) {
      throw InvalidArgument("stage channels must be positive multiples of norm_groups");
    }
  }
  if (stem_channels % norm_groups != 0 || feature_dim % norm_groups != 0) {
    throw InvalidArgument("stem and feature widths must be multiples of norm_groups");
  }
}

void ProjectorConfig::Validate() const {
  if (widths.size() < 2) throw InvalidArgument("projector needs at least one hidden layer");
  for (int w : widths) {
    if (w < 1) throw InvalidArgument("projector widths must be positive");
  }
}

void VicregWeights::Validate() const {
  if (lambda < 0 || mu < 0 || nu < 0 || gamma < 0 || epsilon < 0) {
    throw InvalidArgument("VICReg weights must be nonnegative");
  }
}

void SslSchedule::Validate() const {
  if (epochs < 1) throw InvalidArgument("ssl.epochs must be >= 1");
  if (batch_size < 2) throw InvalidArgument("ssl.batch_size must be >= 2");
  if (warmup_epochs < 0 || warmup_epochs >= epochs) {
    throw InvalidArgument("ssl.warmup_epochs must lie in [0, epochs)");
  }
  if (!(peak_lr >= 0)) throw InvalidArgument("ssl.peak_lr must be >= 0");
  if (eval_every < 1) throw InvalidArgument("ssl.eval_every must be >= 1");
  if (rois_per_core < 0 || probe_rois_per_core < 0) {
    throw InvalidArgument("ROI sampling counts must be >= 0");
  }
}

void TransformerConfig::Validate() const {
  if (blocks < 1 || heads < 1 || dim < 1 || mlp_dim < 1 || input_dim < 1) {
    throw InvalidArgument("transformer sizes must be positive");
  }
  if (dim % heads != 0) throw InvalidArgument("transformer dim must be divisible by heads");
  if (num_classes != 2) throw InvalidArgument("only binary classification is supported");
  if (roi_dropout < 0 || roi_dropout > 1) throw InvalidArgument("roi_dropout must lie in [0, 1]");
  if (grid_axial < 1 || grid_lateral < 1) throw InvalidArgument("positional grid must be nonempty");
}

void Stage2Schedule::Validate() const {
  if (epochs < 1) throw InvalidArgument("stage2.epochs must be >= 1");
  if (transformer_warmup_epochs < 0 || transformer_warmup_epochs >= epochs ||
      backbone_warmup_epochs < 0 || backbone_warmup_epochs >= epochs) {
    throw InvalidArgument("stage2 warmups must lie in [0, epochs)");
  }
  if (!(transformer_lr >= 0) || !(backbone_lr >= 0)) {
    throw InvalidArgument("stage2 learning rates must be >= 0");
  }
  if (cores_per_batch < 1) throw InvalidArgument("stage2.cores_per_batch must be >= 1");
}

void RunConfig::Finalize() {
  dataset.seed = seed;
  phantom.seed = seed;
  split.seed = seed;
  roi.Validate();
  phantom.Validate();
  backbone.Validate();
  projector.Validate();
  augment.Validate();
  vicreg.Validate();
  ssl.Validate();
  transformer.Validate();
  stage2.Validate();
  split.Validate();
  if (transformer.input_dim != backbone.feature_dim) {
    throw InvalidArgument("transformer.input_dim must equal backbone.feature_dim");
  }
  const GridShape grid = RoiGridShape(phantom.depth_mm, phantom.width_mm, roi);
  if (grid.axial > transformer.grid_axial || grid.lateral > transformer.grid_lateral) {
    throw InvalidArgument(fmt::format(
        "positional grid {}x{} is smaller than the ROI grid {}x{} of the frame",
        transformer.grid_axial, transformer.grid_lateral, grid.axial, grid.lateral));
  }
  if (threshold < 0 || threshold > 1) throw InvalidArgument("threshold must lie in [0, 1]");
}

std::string RunConfig::ToIni() const {
  std::string out;
  std::string current;
  VisitFields(*this, [&](const char* section, const char* key, const auto& field) {
    if (current != section) {
      if (!current.empty()) out += "\n";
      out += fmt::format("[{}]\n", section);
      current = section;
    }
    out += fmt::format("{} = {}\n", key, Format(field));
  });
  return out;
}

std::string RunConfig::Hash() const {
  RunConfig copy = *this;
  copy.output_dir.clear();
  return Sha256Hex(copy.ToIni()).substr(0, 16);
}

RunConfig ParseRunConfig(const std::string& ini_text, const std::vector<std::string>& overrides) {
  pt::ptree tree;
  if (!ini_text.empty()) {
    std::istringstream in(ini_text);
    try {
      pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
      throw InvalidArgument(std::string("malformed config: ") + e.what());
    }
  }
  for (const std::string& o : overrides) ApplyOverride(tree, o);
  return FromTree(tree);
}

RunConfig LoadRunConfig(const std::filesystem::path& file,
                        const std::vector<std::string>& overrides) {
  std::string text;
  if (!file.empty()) {
    std::ifstream in(file);
    if (!in) throw Error("cannot open config file: " + file.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }
  return ParseRunConfig(text, overrides);
}

}  // namespace coremil
