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

#include "ckad/backbone.hpp"
#include "ckad/params.hpp"

namespace ckad {

// kFrozen evaluates with detached parameters: gradients reach the inputs
// but never the discriminator weights.
enum class ParamMode { kTrainable, kFrozen };

// Energy discriminators. Per scale, a position-shared MLP over channels
// (1x1 convs C -> 2C -> C -> 1, LeakyReLU between layers) followed by
// softplus maps every patch feature to an energy in [0, inf). The image head
// applies the same MLP shape to the concatenated global-average-pooled maps.
class Discriminator {
 public:
  static constexpr double kSlope = 0.2;

  Discriminator(std::vector<Shape> scale_shapes, std::uint64_t seed);

  // feats [N, C_s, H, W] -> pre-softplus logits [N, 1, H, W]
  Tensor patch_logits(std::size_t scale, const Tensor& feats, ParamMode mode) const;
  Tensor energy_map(std::size_t scale, const Tensor& feats, ParamMode mode) const;
  // [N, 1, 1, 1]
  Tensor image_logits(const FeatureBatch& feats, ParamMode mode) const;
  Tensor energy_image(const FeatureBatch& feats, ParamMode mode) const;

  std::size_t num_scales() const { return shapes_.size(); }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }

 private:
  Tensor mlp(const std::string& prefix, const Tensor& x, ParamMode mode) const;

  std::vector<Shape> shapes_;
  ParamStore params_;
};

}  // namespace ckad
