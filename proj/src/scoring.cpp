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

#include "ckad/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "ckad/error.hpp"
#include "ckad/image_ops.hpp"
#include "ckad/ops.hpp"

namespace ckad {

std::vector<double> position_error(const Tensor& feat, const Tensor& recon) {
  if (feat.shape() != recon.shape() || feat.ndim() != 3)
    throw DimensionError("position_error needs two [C, H, W] maps of equal shape, got " +
                         shape_str(feat.shape()) + " and " + shape_str(recon.shape()));
  const std::size_t c = feat.dim(0), hw = feat.dim(1) * feat.dim(2);
  const auto f = feat.data(), r = recon.data();
  std::vector<double> out(hw);
  for (std::size_t p = 0; p < hw; ++p) {
    double fr = 0.0, ff = 0.0, rr = 0.0;
    for (std::size_t ch = 0; ch < c; ++ch) {
      const double a = f[ch * hw + p], b = r[ch * hw + p];
      fr += a * b;
      ff += a * a;
      rr += b * b;
    }
    const double nf = std::max(std::sqrt(ff), ops::kCosineEps);
    const double nr = std::max(std::sqrt(rr), ops::kCosineEps);
    out[p] = 1.0 - fr / (nf * nr);
  }
  return out;
}

ScoreMap score_map(const FeaturePyramid& pyr, const FeaturePyramid& recon, std::size_t out_h,
                   std::size_t out_w, double sigma) {
  if (pyr.scales != recon.scales || pyr.maps.size() != recon.maps.size())
    throw DimensionError("score_map: scale sets differ");
  if (sigma < 0.0) throw ConfigError("sigma must be non-negative");
  std::vector<double> total(out_h * out_w, 0.0);
  for (std::size_t s = 0; s < pyr.maps.size(); ++s) {
    const auto err = position_error(pyr.maps[s], recon.maps[s]);
    const auto up = image::bilinear_resize(err, pyr.maps[s].dim(1), pyr.maps[s].dim(2), out_h, out_w);
    for (std::size_t i = 0; i < total.size(); ++i) total[i] += up[i];
  }
  total = image::gaussian_blur(total, out_h, out_w, sigma);
  return {Tensor({out_h, out_w}, std::move(total)), {}};
}

double image_score(const ScoreMap& map, std::size_t k) {
  const auto v = map.values.data();
  if (k < 1 || k > v.size())
    throw ConfigError("top-k must be in [1, " + std::to_string(v.size()) + "], got " + std::to_string(k));
  std::vector<double> copy(v.begin(), v.end());
  std::nth_element(copy.begin(), copy.begin() + static_cast<long>(k - 1), copy.end(), std::greater<>());
  std::sort(copy.begin(), copy.begin() + static_cast<long>(k), std::greater<>());
  double s = 0.0;
  for (std::size_t i = 0; i < k; ++i) s += copy[i];
  return s / static_cast<double>(k);
}

}  // namespace ckad
