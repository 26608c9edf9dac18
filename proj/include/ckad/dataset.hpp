// Copyright 2026 The ckad Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ckad/tensor.hpp"

namespace ckad {

enum class Split { kTrain, kTest };
enum class Label { kNormal, kAnomalous };

struct DatasetEntry {
  Split split = Split::kTrain;
  Label label = Label::kNormal;
  std::string image;                // relative to the manifest directory
  std::optional<std::string> mask;  // binary [H, W] tensor file
};

// Line-oriented dataset index: optional `# key = value` header lines, then
// `split<TAB>label<TAB>image_path<TAB>mask_path_or_dash` per image.
struct DatasetManifest {
  std::filesystem::path root;  // directory holding the manifest
  std::vector<std::pair<std::string, std::string>> meta;
  std::vector<DatasetEntry> entries;

  static DatasetManifest load(const std::filesystem::path& file);
  void save(const std::filesystem::path& file) const;
  // Every anomalous test entry has a mask.
  void validate() const;

  std::vector<const DatasetEntry*> select(Split split, std::optional<Label> label = std::nullopt) const;
  std::filesystem::path resolve(const std::string& rel) const { return root / rel; }
};

std::string to_string(Split s);
std::string to_string(Label l);

}  // namespace ckad
