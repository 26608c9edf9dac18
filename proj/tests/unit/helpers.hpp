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
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "ckad/backbone.hpp"
#include "ckad/rng.hpp"
#include "ckad/tensor.hpp"

namespace testutil {

inline ckad::Tensor randn(ckad::Shape shape, std::uint64_t seed, double std = 1.0,
                          bool requires_grad = false) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, std);
  std::vector<double> v(ckad::shape_numel(shape));
  for (auto& x : v) x = nd(rng);
  return ckad::Tensor(std::move(shape), std::move(v), requires_grad);
}

inline ckad::FeatureBatch random_batch(const std::vector<ckad::Shape>& shapes, std::size_t n,
                                       std::uint64_t seed) {
  ckad::FeatureBatch b;
  std::uint64_t k = 0;
  for (const auto& s : shapes) b.maps.push_back(randn({n, s[0], s[1], s[2]}, ckad::derive_seed(seed, "fb", k++)));
  return b;
}

inline double dot(const ckad::Tensor& a, const ckad::Tensor& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.numel(); ++i) s += a.at(i) * b.at(i);
  return s;
}

// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& tag) {
  static std::uint64_t counter = 0;
  auto p = std::filesystem::temp_directory_path() /
           ("ckad_test_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace testutil
