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

#include "ckad/discriminator.hpp"

#include <string>

#include "ckad/error.hpp"
#include "ckad/ops.hpp"
#include "ckad/rng.hpp"

namespace ckad {
namespace {

constexpr double kOutputInitScale = 0.1;

void add_mlp(ParamStore& ps, const std::string& prefix, std::size_t c, std::uint64_t seed) {
  const std::size_t widths[4] = {c, 2 * c, c, 1};
  for (std::size_t l = 0; l < 3; ++l) {
    const std::string n = prefix + ".fc" + std::to_string(l);
    Tensor w = he_normal({widths[l + 1], widths[l], 1, 1}, widths[l], derive_seed(seed, n));
    // Small output layer: energies start near softplus(0) = ln 2, below the
    // usual hinge threshold, so both hinge directions are active at step 0.
    if (l == 2)
      for (auto& v : w.mutable_data()) v *= kOutputInitScale;
    ps.add(n + ".weight", w);
    ps.add(n + ".bias", Tensor({widths[l + 1]}, 0.0));
  }
}

}  // namespace

Discriminator::Discriminator(std::vector<Shape> scale_shapes, std::uint64_t seed)
    : shapes_(std::move(scale_shapes)) {
  if (shapes_.empty()) throw ConfigError("discriminator needs at least one feature map");
  std::size_t total = 0;
  for (std::size_t i = 0; i < shapes_.size(); ++i) {
    add_mlp(params_, "patch.map" + std::to_string(i), shapes_[i][0], seed);
    total += shapes_[i][0];
  }
  add_mlp(params_, "image", total, seed);
}

Tensor Discriminator::mlp(const std::string& prefix, const Tensor& x, ParamMode mode) const {
  auto param = [&](const std::string& n) {
    const Tensor& t = params_.get(n);
    return mode == ParamMode::kFrozen ? t.detach() : t;
  };
  Tensor h = x;
  for (std::size_t l = 0; l < 3; ++l) {
    const std::string n = prefix + ".fc" + std::to_string(l);
    h = ops::conv2d(h, param(n + ".weight"), param(n + ".bias"));
    if (l < 2) h = ops::leaky_relu(h, kSlope);
  }
  return h;
}

Tensor Discriminator::patch_logits(std::size_t scale, const Tensor& feats, ParamMode mode) const {
  if (scale >= shapes_.size()) throw DimensionError("discriminator scale index out of range");
  if (feats.ndim() != 4 || feats.dim(1) != shapes_[scale][0])
    throw DimensionError("discriminator map " + std::to_string(scale) + " expects " +
                         std::to_string(shapes_[scale][0]) + " channels, got " + shape_str(feats.shape()));
  return mlp("patch.map" + std::to_string(scale), feats, mode);
}

Tensor Discriminator::energy_map(std::size_t scale, const Tensor& feats, ParamMode mode) const {
  return ops::softplus(patch_logits(scale, feats, mode));
}

Tensor Discriminator::image_logits(const FeatureBatch& feats, ParamMode mode) const {
  if (feats.maps.size() != shapes_.size())
    throw DimensionError("image discriminator expects " + std::to_string(shapes_.size()) + " maps");
  std::vector<Tensor> pooled;
  for (std::size_t i = 0; i < feats.maps.size(); ++i) {
    if (feats.maps[i].ndim() != 4 || feats.maps[i].dim(1) != shapes_[i][0])
      throw DimensionError("image discriminator map " + std::to_string(i) + " has shape " +
                           shape_str(feats.maps[i].shape()));
    pooled.push_back(ops::global_avg_pool(feats.maps[i]));
  }
  Tensor x = pooled.size() == 1 ? pooled[0] : ops::concat_channels(pooled);
  return mlp("image", x, mode);
}

Tensor Discriminator::energy_image(const FeatureBatch& feats, ParamMode mode) const {
  return ops::softplus(image_logits(feats, mode));
}

}  // namespace ckad
