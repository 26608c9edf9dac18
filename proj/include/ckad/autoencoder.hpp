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

// Feature-pyramid auto-encoder. Every input map is brought down to the
// smallest map's size with stride-2 3x3 conv / instance norm / ReLU steps,
// the results are concatenated and one stride-2 residual block produces the
// latent. Residual deconvolution stages (2x2 transposed conv path plus a
// nearest-upsample + 1x1 conv skip) climb back up, and a 1x1 head emits each
// reconstructed map at the stage matching its size.
class AutoEncoder {
 public:
  // scale_shapes[i] is [C, H, W] of the i-th selected map, largest first.
  AutoEncoder(std::vector<Shape> scale_shapes, std::uint64_t seed);

  Tensor encode(const FeatureBatch& input) const;
  FeatureBatch decode(const Tensor& z) const;
  FeatureBatch reconstruct(const FeatureBatch& input) const { return decode(encode(input)); }

  FeaturePyramid reconstruct(const FeaturePyramid& pyr) const;

  const std::vector<Shape>& scale_shapes() const { return shapes_; }
  // [C, H, W] of the latent for one sample.
  Shape latent_shape() const;
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }

 private:
  void check_input(const FeatureBatch& input) const;

  std::vector<Shape> shapes_;
  std::size_t latent_channels_ = 0;
  std::vector<std::size_t> downs_;         // stride-2 steps per scale
  std::vector<std::size_t> stage_widths_;  // output channels per decoder stage
  std::vector<int> head_stage_;            // decoder stage feeding each head
  ParamStore params_;
};

}  // namespace ckad
