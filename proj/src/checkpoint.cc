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

#include "coremil/checkpoint.h"

#include <fmt/format.h>

#include "coremil/errors.h"

namespace coremil {

nlohmann::json ToJson(const CheckpointMeta& meta) {
  return {{"format_version", meta.format_version}, {"kind", meta.kind},
          {"method", meta.method},                 {"config_hash", meta.config_hash},
          {"config_ini", meta.config_ini},         {"history", meta.history}};
}

CheckpointMeta MetaFromJson(const nlohmann::json& j) {
  CheckpointMeta meta;
  try {
    meta.format_version = j.at("format_version").get<int>();
    meta.kind = j.at("kind").get<std::string>();
    meta.method = j.at("method").get<std::string>();
    meta.config_hash = j.at("config_hash").get<std::string>();
    meta.config_ini = j.at("config_ini").get<std::string>();
    meta.history = j.value("history", nlohmann::json::object());
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("checkpoint metadata: ") + e.what());
  }
  return meta;
}

CheckpointWriter::CheckpointWriter(const CheckpointMeta& meta) {
  AddJson("meta", ToJson(meta));
}

void CheckpointWriter::AddModule(const std::string& name, const torch::nn::Module& module) {
  torch::serialize::OutputArchive sub;
  module.save(sub);
  archive_.write(name, sub);
}

void CheckpointWriter::AddState(const std::string& name, const ModuleState& state) {
  torch::serialize::OutputArchive sub;
  nlohmann::json names = nlohmann::json::array();
  for (std::size_t i = 0; i < state.tensors.size(); ++i) {
    names.push_back(state.tensors[i].first);
    sub.write("t" + std::to_string(i), state.tensors[i].second);
  }
  sub.write("names", c10::IValue(names.dump()));
  archive_.write(name, sub);
}

void CheckpointWriter::AddOptimizer(const std::string& name,
                                    const torch::optim::Optimizer& optimizer) {
  torch::serialize::OutputArchive sub;
  optimizer.save(sub);
  archive_.write(name, sub);
}

void CheckpointWriter::AddJson(const std::string& name, const nlohmann::json& value) {
  archive_.write(name, c10::IValue(value.dump()));
}

void CheckpointWriter::Save(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  archive_.save_to(tmp.string());
  std::filesystem::rename(tmp, path);
}

CheckpointReader::CheckpointReader(const std::filesystem::path& path) : path_(path) {
  if (!std::filesystem::exists(path)) throw FormatError("no checkpoint at " + path.string());
  try {
    archive_.load_from(path.string());
  } catch (const c10::Error& e) {
    throw FormatError("unreadable checkpoint " + path.string());
  }
  meta_ = MetaFromJson(ReadJson("meta"));
  if (meta_.format_version != kCheckpointFormatVersion) {
    throw FormatError(fmt::format("{}: checkpoint format {} (expected {})", path.string(),
                                  meta_.format_version, kCheckpointFormatVersion));
  }
}

bool CheckpointReader::Has(const std::string& name) {
  for (const std::string& key : archive_.keys()) {
    if (key == name) return true;
  }
  return false;
}

void CheckpointReader::LoadModule(const std::string& name, torch::nn::Module& module) {
  torch::serialize::InputArchive sub;
  if (!archive_.try_read(name, sub)) throw FormatError(path_.string() + " lacks module " + name);
  module.load(sub);
}

ModuleState CheckpointReader::ReadState(const std::string& name) {
  torch::serialize::InputArchive sub;
  if (!archive_.try_read(name, sub)) throw FormatError(path_.string() + " lacks state " + name);
  c10::IValue names_value;
  sub.read("names", names_value);
  const nlohmann::json names = nlohmann::json::parse(names_value.toStringRef());
  ModuleState state;
  for (std::size_t i = 0; i < names.size(); ++i) {
    torch::Tensor t;
    sub.read("t" + std::to_string(i), t);
    state.tensors.emplace_back(names[i].get<std::string>(), t);
  }
  return state;
}

void CheckpointReader::LoadOptimizer(const std::string& name, torch::optim::Optimizer& optimizer) {
  torch::serialize::InputArchive sub;
  if (!archive_.try_read(name, sub)) throw FormatError(path_.string() + " lacks optimizer " + name);
  optimizer.load(sub);
}

nlohmann::json CheckpointReader::ReadJson(const std::string& name) {
  c10::IValue value;
  if (!archive_.try_read(name, value) || !value.isString()) {
    throw FormatError(path_.string() + " lacks entry " + name);
  }
  try {
    return nlohmann::json::parse(value.toStringRef());
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path_.string() + ": malformed " + name);
  }
}

void CheckpointReader::RequireConfigHash(const std::string& expected) const {
  if (meta_.config_hash != expected) {
    throw ConfigMismatchError(fmt::format("{} was written under config {} but the run uses {}",
                                          path_.string(), meta_.config_hash, expected));
  }
}

void CheckpointReader::RequireKind(const std::string& kind) const {
  if (meta_.kind != kind) {
    throw InvalidArgument(fmt::format("{} holds a {} checkpoint, expected {}", path_.string(),
                                      meta_.kind, kind));
  }
}

}  // namespace coremil
