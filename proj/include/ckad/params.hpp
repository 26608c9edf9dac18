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

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "ckad/tensor.hpp"

namespace ckad {

// Ordered collection of learnable tensors under stable dotted names.
class ParamStore {
 public:
  Tensor& add(const std::string& name, Tensor value);
  const Tensor& get(const std::string& name) const;
  bool contains(const std::string& name) const;

  std::size_t size() const { return entries_.size(); }
  const std::vector<std::pair<std::string, Tensor>>& entries() const { return entries_; }
  std::vector<std::pair<std::string, Tensor>>& entries() { return entries_; }

  void zero_grad();
  // Sum of squared grads over every parameter.
  double grad_sq_norm() const;
  std::size_t numel() const;
  // FNV-1a over names and raw value bytes.
  std::uint64_t checksum() const;

  // Writes one tensor file per parameter plus `<prefix>manifest.txt` lines
  // `name<TAB>relative_path<TAB>shape`.
  void save(const std::filesystem::path& dir, const std::string& prefix = "") const;
  // Loads values in place; names and shapes must match exactly.
  void load(const std::filesystem::path& dir, const std::string& prefix = "");

 private:
  std::vector<std::pair<std::string, Tensor>> entries_;
};

// He-normal initialised tensor with the given fan-in.
Tensor he_normal(Shape shape, std::size_t fan_in, std::uint64_t seed);

}  // namespace ckad
