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

#ifndef COREMIL_CHECKPOINT_H_
#define COREMIL_CHECKPOINT_H_

#include <filesystem>
#include <string>

#include <json.hpp>
#include <torch/torch.h>

#include "coremil/backbone.h"

namespace coremil {

inline constexpr int kCheckpointFormatVersion = 1;

// Metadata stored as a JSON string inside every checkpoint archive.
struct CheckpointMeta {
  int format_version = kCheckpointFormatVersion;
  std::string kind;    // "pretrain", "method" or "baseline"
  std::string method;  // aggregator or baseline name
  std::string config_hash;
  std::string config_ini;
  nlohmann::json history = nlohmann::json::object();
};

nlohmann::json ToJson(const CheckpointMeta& meta);
CheckpointMeta MetaFromJson(const nlohmann::json& j);

class CheckpointWriter {
 public:
  explicit CheckpointWriter(const CheckpointMeta& meta);
  void AddModule(const std::string& name, const torch::nn::Module& module);
  void AddState(const std::string& name, const ModuleState& state);
  void AddOptimizer(const std::string& name, const torch::optim::Optimizer& optimizer);
  void AddJson(const std::string& name, const nlohmann::json& value);
  // Writes to a temporary file and renames it into place.
  void Save(const std::filesystem::path& path);

 private:
  torch::serialize::OutputArchive archive_;
};

class CheckpointReader {
 public:
  explicit CheckpointReader(const std::filesystem::path& path);

  const CheckpointMeta& meta() const { return meta_; }
  bool Has(const std::string& name);
  void LoadModule(const std::string& name, torch::nn::Module& module);
  ModuleState ReadState(const std::string& name);
  void LoadOptimizer(const std::string& name, torch::optim::Optimizer& optimizer);
  nlohmann::json ReadJson(const std::string& name);

  // Throws ConfigMismatchError unless the stored hash equals expected.
  void RequireConfigHash(const std::string& expected) const;
  void RequireKind(const std::string& kind) const;

 private:
  std::filesystem::path path_;
  torch::serialize::InputArchive archive_;
  CheckpointMeta meta_;
};

}  // namespace coremil

#endif  // COREMIL_CHECKPOINT_H_
