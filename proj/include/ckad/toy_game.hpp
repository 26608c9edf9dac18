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
#include <vector>

#include "ckad/losses.hpp"

// Two-dimensional version of the image-level alignment game: normal and
// anomalous "features" are separated Gaussian blobs, G and D are small MLPs
// and training uses the hinge energy losses directly.
namespace ckad::toy {

struct ToyConfig {
  std::size_t steps = 4000;
  std::size_t batch = 64;  // per class and step
  LossConstants constants{0.5, 0.5, 1.0, 1.0};
  double recon_weight = 1.0;  // squared error keeping G near identity on normals
  double lr_g = 2e-3;
  double lr_d = 2e-3;
  std::size_t hidden = 32;
  double normal_x = -1.5, anomaly_x = 1.5, blob_std = 0.4;
  std::size_t eval_samples = 4000;
  std::size_t grid_bins = 6;  // per axis over [grid_lo, grid_hi]^2
  double grid_lo = -3.0, grid_hi = 3.0;
  std::uint64_t seed = 11;
};

struct ToyResult {
  std::vector<double> generated_hist;  // normalised, grid_bins^2
  std::vector<double> normal_hist;
  std::vector<double> anomalous_hist;
  double tv_to_normal = 0.0;     // L1 convention
  double tv_to_anomalous = 0.0;
  std::vector<double> d_losses;  // one per step
  bool thresholds_met() const;
};

inline constexpr double kToyTvMax = 0.35;
inline constexpr double kToyMargin = 0.3;

// Histogram of points [N, 2] (row-major) on the fixed grid; points outside
// are clamped into the border bins.
std::vector<double> histogram2d(const std::vector<double>& pts, const ToyConfig& cfg);

// steps = 0 evaluates the untrained generator.
ToyResult train_toy_game(const ToyConfig& cfg);

}  // namespace ckad::toy
