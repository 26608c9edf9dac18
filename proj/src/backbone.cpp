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

#include "ckad/backbone.hpp"

#include <random>
#include <string>

#include "ckad/error.hpp"
#include "ckad/ops.hpp"
#include "ckad/rng.hpp"
#include "ckad/tensor_file.hpp"

namespace ckad {

void FeaturePyramid::validate() const {
  if (scales.empty() || scales.size() != maps.size())
    throw DimensionError("feature pyramid needs one map per scale");
  for (std::size_t i = 0; i < maps.size(); ++i) {
    if (maps[i].ndim() != 3)
      throw DimensionError("feature map for scale " + std::to_string(scales[i]) +
                           " must be [C,H,W], got " + shape_str(maps[i].shape()));
    if (i == 0) continue;
    if (scales[i] <= scales[i - 1])
      throw DimensionError("feature pyramid scales must be strictly increasing");
    const std::size_t gap = static_cast<std::size_t>(scales[i] - scales[i - 1]);
    const std::size_t h0 = maps[i - 1].dim(1), w0 = maps[i - 1].dim(2);
    if (maps[i].dim(1) << gap != h0 || maps[i].dim(2) << gap != w0)
      throw DimensionError("feature map for scale " + std::to_string(scales[i]) + " is " +
                           shape_str(maps[i].shape()) + ", expected spatial size halving from " +
                           shape_str(maps[i - 1].shape()));
  }
}

FeatureBatch FeatureBatch::detach() const {
  FeatureBatch out;
  for (const auto& m : maps) out.maps.push_back(m.detach());
  return out;
}

FeatureBatch stack_pyramids(const std::vector<const FeaturePyramid*>& pyramids) {
  if (pyramids.empty()) throw DimensionError("stack_pyramids: empty input");
  FeatureBatch out;
  const std::size_t ns = pyramids[0]->maps.size();
  for (std::size_t s = 0; s < ns; ++s) {
    Shape shape = pyramids[0]->maps[s].shape();
    std::vector<double> values;
    values.reserve(pyramids.size() * shape_numel(shape));
    for (const auto* p : pyramids) {
      if (p->maps.size() != ns || p->maps[s].shape() != shape)
        throw DimensionError("stack_pyramids: pyramids disagree at scale index " + std::to_string(s));
      values.insert(values.end(), p->maps[s].data().begin(), p->maps[s].data().end());
    }
    shape.insert(shape.begin(), pyramids.size());
    out.maps.emplace_back(std::move(shape), std::move(values));
  }
  return out;
}

FeatureBatch concat_batches(const FeatureBatch& a, const FeatureBatch& b) {
  if (a.maps.size() != b.maps.size()) throw DimensionError("concat_batches: scale count mismatch");
  FeatureBatch out;
  for (std::size_t s = 0; s < a.maps.size(); ++s)
    out.maps.push_back(ops::concat_batch({a.maps[s], b.maps[s]}));
  return out;
}

FeatureBatch slice_batch(const FeatureBatch& b, std::size_t begin, std::size_t end) {
  FeatureBatch out;
  for (const auto& m : b.maps) out.maps.push_back(ops::slice_batch(m, begin, end));
  return out;
}

FeaturePyramid unstack(const FeatureBatch& b, const std::vector<int>& scales, std::size_t i) {
  FeaturePyramid p;
  p.scales = scales;
  for (const auto& m : b.maps) {
    const std::size_t row = m.numel() / m.dim(0);
    const double* src = m.data().data() + i * row;
    p.maps.emplace_back(Shape{m.dim(1), m.dim(2), m.dim(3)}, std::vector<double>(src, src + row));
  }
  return p;
}

void BackboneConfig::validate() const {
  if (block_channels.empty()) throw ConfigError("backbone needs at least one block");
  if (scales.empty()) throw ConfigError("backbone needs at least one selected scale");
  for (std::size_t i = 0; i < scales.size(); ++i) {
    if (scales[i] < 1 || static_cast<std::size_t>(scales[i]) > blocks())
      throw ConfigError("selected scale " + std::to_string(scales[i]) + " outside 1.." +
                        std::to_string(blocks()));
    if (i && scales[i] <= scales[i - 1]) throw ConfigError("selected scales must increase");
  }
  if (input_size == 0 || input_size % (std::size_t{1} << blocks()) != 0)
    throw ConfigError("input size " + std::to_string(input_size) + " not divisible by 2^" +
                      std::to_string(blocks()));
}

std::vector<Shape> BackboneConfig::scale_shapes() const {
  std::vector<Shape> out;
  for (int s : scales) {
    const std::size_t hw = input_size >> s;
    out.push_back(Shape{block_channels[static_cast<std::size_t>(s - 1)], hw, hw});
  }
  return out;
}

RandomBackbone::RandomBackbone(BackboneConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  std::size_t cin = cfg_.input_channels;
  std::uint64_t idx = 0;
  for (std::size_t b = 0; b < cfg_.blocks(); ++b) {
    const std::size_t cout = cfg_.block_channels[b];
    for (std::size_t u = 0; u < 2; ++u) {
      const std::size_t c_in = u == 0 ? cin : cout;
      const std::string p = "block" + std::to_string(b + 1) + ".unit" + std::to_string(u);
      params_.add(p + ".conv", he_normal({cout, c_in, 3, 3}, c_in * 9, derive_seed(cfg_.seed, p, idx++)));
      std::mt19937_64 rng(derive_seed(cfg_.seed, p + ".norm"));
      std::normal_distribution<double> nd(0.0, 0.1);
      std::vector<double> gamma(cout), beta(cout);
      for (auto& g : gamma) g = 1.0 + nd(rng);
      for (auto& v : beta) v = nd(rng);
      params_.add(p + ".norm.gamma", Tensor({cout}, gamma));
      params_.add(p + ".norm.beta", Tensor({cout}, beta));
      if (u == 0)
        params_.add(p + ".skip", he_normal({cout, c_in, 1, 1}, c_in, derive_seed(cfg_.seed, p + ".skip")));
    }
    cin = cout;
  }
  for (auto& e : params_.entries()) e.second.set_requires_grad(false);
}

Tensor RandomBackbone::unit(const Tensor& x, std::size_t block, std::size_t u, std::size_t stride) const {
  const std::string p = "block" + std::to_string(block + 1) + ".unit" + std::to_string(u);
  Tensor y = ops::conv2d(x, params_.get(p + ".conv"), std::nullopt, {stride, 1});
  y = ops::instance_norm(y, params_.get(p + ".norm.gamma"), params_.get(p + ".norm.beta"));
  Tensor skip = u == 0 ? ops::conv2d(x, params_.get(p + ".skip"), std::nullopt, {stride, 0}) : x;
  return ops::relu(ops::add(y, skip));
}

FeatureBatch RandomBackbone::extract_batch(const Tensor& images) const {
  if (images.ndim() != 4 || images.dim(1) != cfg_.input_channels || images.dim(2) != cfg_.input_size ||
      images.dim(3) != cfg_.input_size)
    throw DimensionError("backbone expects [N," + std::to_string(cfg_.input_channels) + "," +
                         std::to_string(cfg_.input_size) + "," + std::to_string(cfg_.input_size) +
                         "], got " + shape_str(images.shape()));
  NoGradGuard guard;
  FeatureBatch out;
  Tensor x = images.detach();
  std::size_t next = 0;
  for (std::size_t b = 0; b < cfg_.blocks() && next < cfg_.scales.size(); ++b) {
    x = unit(x, b, 0, 2);
    x = unit(x, b, 1, 1);
    if (static_cast<int>(b + 1) == cfg_.scales[next]) {
      out.maps.push_back(x);
      ++next;
    }
  }
  return out;
}

FeaturePyramid RandomBackbone::extract(const Tensor& image) const {
  if (image.ndim() != 3) throw DimensionError("extract expects [C,H,W], got " + shape_str(image.shape()));
  Shape s = image.shape();
  s.insert(s.begin(), 1);
  FeaturePyramid p = unstack(extract_batch(ops::reshape(image.detach(), s)), cfg_.scales, 0);
  p.source = FeatureSource::kInternalBackbone;
  return p;
}

FeaturePyramid load_pyramid(const std::vector<std::pair<int, std::filesystem::path>>& files) {
  FeaturePyramid p;
  p.source = FeatureSource::kExternalFile;
  for (const auto& [scale, path] : files) {
    Tensor t = load_tensor(path);
    if (t.ndim() != 3)
      throw FormatError(path.string() + ": feature map must be [C,H,W], found " + shape_str(t.shape()));
    p.scales.push_back(scale);
    p.maps.push_back(std::move(t));
  }
  try {
    p.validate();
  } catch (const DimensionError& e) {
    std::string names;
    for (const auto& f : files) names += " " + f.second.string();
    throw FormatError(std::string(e.what()) + " (files:" + names + ")");
  }
  return p;
}

void save_pyramid(const FeaturePyramid& pyr, const std::vector<std::filesystem::path>& files) {
  if (files.size() != pyr.maps.size()) throw UsageError("save_pyramid: one path per scale required");
  for (std::size_t i = 0; i < files.size(); ++i) save_tensor(files[i], pyr.maps[i]);
}

}  // namespace ckad
