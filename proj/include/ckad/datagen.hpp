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

#include "ckad/dataset.hpp"
#include "ckad/tensor.hpp"

namespace ckad {

enum class DefectKind { kDisk, kSquare, kScratch };
enum class TrainAnomalyKind { kDefect, kElastic };

struct GenParams {
  std::size_t image_size = 64;
  std::size_t channels = 3;
  std::size_t train_normal = 200;
  double rl = 0.05;  // coarse train anomalies as a fraction of train normals
  std::size_t test_normal = 100;
  std::size_t test_anomalous = 100;
  // Texture: `waves` random-phase plane waves of at most `cutoff` cycles per image.
  std::size_t cutoff = 3;
  std::size_t waves = 6;
  std::vector<DefectKind> kinds{DefectKind::kDisk, DefectKind::kSquare, DefectKind::kScratch};
  std::size_t defect_min = 4;  // extent in pixels
  std::size_t defect_max = 10;
  double contrast_min = 0.1;
  double contrast_max = 0.2;
  double elastic_amplitude = 2.0;  // pixels
  double elastic_scale = 3.0;      // smoothing std of the displacement field
  TrainAnomalyKind train_anomalies = TrainAnomalyKind::kDefect;
  std::uint64_t seed = 1;

  void validate() const;
  std::size_t train_anomalous() const;
  // Same `key = value` format as the training config; unknown keys are errors.
  void set(const std::string& key, const std::string& value);
  static GenParams load(const std::filesystem::path& file);
};

struct DefectSample {
  Tensor image;  // [C, H, W]
  Tensor mask;   // [H, W], 0 or 1
  DefectKind kind;
};

// Smooth random field in [0, 1], [C, H, W].
Tensor gen_normal(const GenParams& p, std::mt19937_64& rng);
// Composites one defect; pixels outside the returned mask are untouched.
DefectSample plant_defect(const Tensor& image, const GenParams& p, std::mt19937_64& rng);
// Random smooth displacement (std `scale` Gaussian-smoothed noise rescaled to
// per-axis std `amplitude`) applied with bilinear resampling and border
// clamping.
Tensor elastic_distort(const Tensor& image, double amplitude, double scale, std::mt19937_64& rng);

// Writes images/, masks/ and manifest.tsv under `out`. Train anomalies are
// stored without masks.
DatasetManifest gen_dataset(const GenParams& p, const std::filesystem::path& out);

}  // namespace ckad
