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

#include <string>
#include <vector>

#include "ckad/backbone.hpp"
#include "ckad/tensor.hpp"

namespace ckad {

inline constexpr double kDefaultSigma = 4.0;
inline constexpr std::size_t kDefaultTopK = 100;

struct ScoreMap {
  Tensor values;  // [H, W] at input resolution
  std::string id;
};

// 1 - cos over channels at every position: [C, H, W] x2 -> [H, W].
std::vector<double> position_error(const Tensor& feat, const Tensor& recon);

// Per-scale position errors, bilinearly upsampled to out_h x out_w, summed
// over scales and smoothed with a Gaussian of std sigma (sigma = 0: none).
ScoreMap score_map(const FeaturePyramid& pyr, const FeaturePyramid& recon, std::size_t out_h,
                   std::size_t out_w, double sigma = kDefaultSigma);

// Mean of the k largest values, 1 <= k <= H*W.
double image_score(const ScoreMap& map, std::size_t k = kDefaultTopK);

}  // namespace ckad
