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

#include "ckad/autoencoder.hpp"

#include <string>

#include "ckad/error.hpp"
#include "ckad/ops.hpp"
#include "ckad/rng.hpp"

namespace ckad {
namespace {

// k with size == smallest * 2^k.
std::size_t log2_exact(std::size_t size, std::size_t smallest, const char* what) {
  std::size_t k = 0;
  while ((smallest << k) < size) ++k;
  if ((smallest << k) != size)
    throw DimensionError(std::string(what) + ": spatial sizes must differ by powers of two");
  return k;
}

void add_norm(ParamStore& ps, const std::string& name, std::size_t c) {
  ps.add(name + ".gamma", Tensor({c}, 1.0));
  ps.add(name + ".beta", Tensor({c}, 0.0));
}

Tensor norm(const ParamStore& ps, const std::string& name, const Tensor& x) {
  return ops::instance_norm(x, ps.get(name + ".gamma"), ps.get(name + ".beta"));
}

}  // namespace

AutoEncoder::AutoEncoder(std::vector<Shape> scale_shapes, std::uint64_t seed)
    : shapes_(std::move(scale_shapes)) {
  if (shapes_.empty()) throw ConfigError("auto-encoder needs at least one feature map");
  for (const auto& s : shapes_)
    if (s.size() != 3 || s[1] != s[2]) throw DimensionError("feature maps must be square [C,H,W]");
  const std::size_t hmin = shapes_.back()[1];
  if (hmin < 2) throw DimensionError("smallest feature map must be at least 2x2");
  std::uint64_t idx = 0;
  auto conv_w = [&](Shape shape, std::size_t fan_in, const std::string& name) {
    params_.add(name, he_normal(std::move(shape), fan_in, derive_seed(seed, name, idx++)));
  };

  for (std::size_t i = 0; i < shapes_.size(); ++i) {
    const std::size_t c = shapes_[i][0];
    if (i && shapes_[i][1] >= shapes_[i - 1][1])
      throw DimensionError("feature maps must be ordered from largest to smallest");
    downs_.push_back(log2_exact(shapes_[i][1], hmin, "auto-encoder"));
    for (std::size_t d = 0; d < downs_[i]; ++d) {
      const std::string p = "enc.map" + std::to_string(i) + ".down" + std::to_string(d);
      conv_w({c, c, 3, 3}, c * 9, p + ".conv");
      add_norm(params_, p + ".norm", c);
    }
    latent_channels_ += c;
  }
  const std::size_t cz = latent_channels_;
  conv_w({cz, cz, 3, 3}, cz * 9, "enc.fuse.conv1");
  add_norm(params_, "enc.fuse.norm1", cz);
  conv_w({cz, cz, 3, 3}, cz * 9, "enc.fuse.conv2");
  add_norm(params_, "enc.fuse.norm2", cz);
  conv_w({cz, cz, 1, 1}, cz, "enc.fuse.skip");

  // Stage j outputs spatial size hmin * 2^j.
  const std::size_t stages = 1 + log2_exact(shapes_.front()[1], hmin, "auto-encoder");
  head_stage_.assign(shapes_.size(), -1);
  std::size_t width = cz;
  std::size_t cin = cz;
  for (std::size_t j = 0; j < stages; ++j) {
    const std::size_t size = hmin << j;
    for (std::size_t i = 0; i < shapes_.size(); ++i)
      if (shapes_[i][1] == size) {
        width = shapes_[i][0];
        head_stage_[i] = static_cast<int>(j);
      }
    stage_widths_.push_back(width);
    const std::string p = "dec.stage" + std::to_string(j);
    conv_w({cin, width, 2, 2}, cin, p + ".deconv");
    params_.add(p + ".deconv_bias", Tensor({width}, 0.0));
    add_norm(params_, p + ".norm", width);
    conv_w({width, cin, 1, 1}, cin, p + ".skip");
    params_.add(p + ".skip_bias", Tensor({width}, 0.0));
    cin = width;
  }
  for (std::size_t i = 0; i < shapes_.size(); ++i) {
    const std::size_t c = shapes_[i][0];
    const std::string p = "head.map" + std::to_string(i);
    conv_w({c, stage_widths_[static_cast<std::size_t>(head_stage_[i])], 1, 1}, c, p + ".weight");
    params_.add(p + ".bias", Tensor({c}, 0.0));
  }
}

Shape AutoEncoder::latent_shape() const {
  const std::size_t h = shapes_.back()[1] / 2;
  return {latent_channels_, h, h};
}

void AutoEncoder::check_input(const FeatureBatch& input) const {
  if (input.maps.size() != shapes_.size())
    throw DimensionError("auto-encoder expects " + std::to_string(shapes_.size()) + " maps, got " +
                         std::to_string(input.maps.size()));
  for (std::size_t i = 0; i < shapes_.size(); ++i) {
    const auto& m = input.maps[i];
    if (m.ndim() != 4 || Shape(m.shape().begin() + 1, m.shape().end()) != shapes_[i])
      throw DimensionError("auto-encoder map " + std::to_string(i) + " is " + shape_str(m.shape()) +
                           ", expected [N," + shape_str(shapes_[i]).substr(1));
  }
}

Tensor AutoEncoder::encode(const FeatureBatch& input) const {
  check_input(input);
  std::vector<Tensor> parts;
  for (std::size_t i = 0; i < shapes_.size(); ++i) {
    Tensor x = input.maps[i];
    for (std::size_t d = 0; d < downs_[i]; ++d) {
      const std::string p = "enc.map" + std::to_string(i) + ".down" + std::to_string(d);
      x = ops::relu(norm(params_, p + ".norm", ops::conv2d(x, params_.get(p + ".conv"), std::nullopt, {2, 1})));
    }
    parts.push_back(x);
  }
  Tensor x = parts.size() == 1 ? parts[0] : ops::concat_channels(parts);
  Tensor y = ops::relu(norm(params_, "enc.fuse.norm1", ops::conv2d(x, params_.get("enc.fuse.conv1"), std::nullopt, {2, 1})));
  y = norm(params_, "enc.fuse.norm2", ops::conv2d(y, params_.get("enc.fuse.conv2"), std::nullopt, {1, 1}));
  Tensor skip = ops::conv2d(x, params_.get("enc.fuse.skip"), std::nullopt, {2, 0});
  return ops::relu(ops::add(y, skip));
}

FeatureBatch AutoEncoder::decode(const Tensor& z) const {
  const Shape ls = latent_shape();
  if (z.ndim() != 4 || Shape(z.shape().begin() + 1, z.shape().end()) != ls)
    throw DimensionError("decode expects latent [N," + shape_str(ls).substr(1) + ", got " +
                         shape_str(z.shape()));
  std::vector<Tensor> stage_out;
  Tensor x = z;
  for (std::size_t j = 0; j < stage_widths_.size(); ++j) {
    const std::string p = "dec.stage" + std::to_string(j);
    Tensor main = ops::conv_transpose2d(x, params_.get(p + ".deconv"), params_.get(p + ".deconv_bias"), 2);
    main = ops::relu(norm(params_, p + ".norm", main));
    Tensor skip = ops::conv2d(ops::upsample_nearest2x(x), params_.get(p + ".skip"), params_.get(p + ".skip_bias"));
    x = ops::add(main, skip);
    stage_out.push_back(x);
  }
  FeatureBatch out;
  for (std::size_t i = 0; i < shapes_.size(); ++i) {
    const std::string p = "head.map" + std::to_string(i);
    out.maps.push_back(ops::conv2d(stage_out[static_cast<std::size_t>(head_stage_[i])],
                                   params_.get(p + ".weight"), params_.get(p + ".bias")));
  }
  return out;
}

FeaturePyramid AutoEncoder::reconstruct(const FeaturePyramid& pyr) const {
  pyr.validate();
  FeaturePyramid out = unstack(reconstruct(stack_pyramids({&pyr})), pyr.scales, 0);
  out.source = pyr.source;
  return out;
}

}  // namespace ckad
