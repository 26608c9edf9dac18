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
#include <vector>

#include "ckad/params.hpp"

namespace ckad {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Bias-corrected Adam over every tensor of a ParamStore.
class Adam {
 public:
  Adam(ParamStore& params, AdamConfig cfg);

  // One update from the currently accumulated grads. Parameters without a
  // grad buffer are treated as having a zero gradient.
  void step();
  std::uint64_t steps() const { return t_; }
  const AdamConfig& config() const { return cfg_; }

  void save(const std::filesystem::path& dir, const std::string& prefix) const;
  void load(const std::filesystem::path& dir, const std::string& prefix);

 private:
  ParamStore* params_;
  AdamConfig cfg_;
  std::uint64_t t_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

}  // namespace ckad
