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
#include <utility>
#include <vector>

#include "ckad/params.hpp"
#include "ckad/tensor.hpp"

namespace ckad {

enum class FeatureSource { kInternalBackbone, kExternalFile };

// Multi-scale features of one image. maps[i] is [C, H, W] for scales[i];
// scale indices are 1-based block numbers and heights halve exactly from
// one selected scale to the next.
struct FeaturePyramid {
  std::vector<int> scales;
  std::vector<Tensor> maps;
  FeatureSource source = FeatureSource::kInternalBackbone;

  // Throws DimensionError if the halving/ordering invariants are broken.
  void validate() const;
};

// Per-scale features of several images: maps[i] is [N, C_i, H_i, W_i].
struct FeatureBatch {
  std::vector<Tensor> maps;

  std::size_t batch_size() const { return maps.empty() ? 0 : maps[0].dim(0); }
  FeatureBatch detach() const;
};

FeatureBatch stack_pyramids(const std::vector<const FeaturePyramid*>& pyramids);
FeatureBatch concat_batches(const FeatureBatch& a, const FeatureBatch& b);
FeatureBatch slice_batch(const FeatureBatch& b, std::size_t begin, std::size_t end);
// Sample i of a batch as a pyramid.
FeaturePyramid unstack(const FeatureBatch& b, const std::vector<int>& scales, std::size_t i);

struct BackboneConfig {
  std::size_t input_size = 64;
  std::size_t input_channels = 3;
  std::vector<std::size_t> block_channels{16, 32, 64};
  std::vector<int> scales{2, 3};
  std::uint64_t seed = 7;

  std::size_t blocks() const { return block_channels.size(); }
  void validate() const;
  // Expected [C, H, W] for each selected scale.
  std::vector<Shape> scale_shapes() const;
};

// Frozen, seeded ResNet-like feature extractor. Each block is two residual
// units (3x3 conv -> instance norm, skip added, then ReLU); the first unit
// of every block has stride 2 and a 1x1 projection skip.
class RandomBackbone {
 public:
  explicit RandomBackbone(BackboneConfig cfg);

  const BackboneConfig& config() const { return cfg_; }
  // image [C, H, W]
  FeaturePyramid extract(const Tensor& image) const;
  // images [N, C, H, W]; runs without recording a graph.
  FeatureBatch extract_batch(const Tensor& images) const;
  std::uint64_t checksum() const { return params_.checksum(); }
  const ParamStore& params() const { return params_; }

 private:
  Tensor unit(const Tensor& x, std::size_t block, std::size_t u, std::size_t stride) const;

  BackboneConfig cfg_;
  ParamStore params_;
};

// Interop for externally computed features: one tensor file per scale.
FeaturePyramid load_pyramid(const std::vector<std::pair<int, std::filesystem::path>>& files);
void save_pyramid(const FeaturePyramid& pyr, const std::vector<std::filesystem::path>& files);

}  // namespace ckad
