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

#include "ckad/image_ops.hpp"

#include <algorithm>
#include <cmath>

#include "ckad/error.hpp"

namespace ckad::image {

std::vector<double> gaussian_kernel(double sigma) {
  if (!(sigma > 0.0)) throw ConfigError("gaussian kernel needs sigma > 0");
  const long radius = static_cast<long>(std::ceil(4.0 * sigma));
  std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
  double s = 0.0;
  for (long i = -radius; i <= radius; ++i) {
    const double v = std::exp(-0.5 * static_cast<double>(i * i) / (sigma * sigma));
    k[static_cast<std::size_t>(i + radius)] = v;
    s += v;
  }
  for (auto& v : k) v /= s;
  return k;
}

std::size_t reflect_index(long i, std::size_t n) {
  if (n == 1) return 0;
  const long period = 2 * static_cast<long>(n) - 2;
  long r = i % period;
  if (r < 0) r += period;
  if (r >= static_cast<long>(n)) r = period - r;
  return static_cast<std::size_t>(r);
}

std::vector<double> gaussian_blur(const std::vector<double>& plane, std::size_t h, std::size_t w,
                                  double sigma) {
  if (plane.size() != h * w) throw DimensionError("gaussian_blur: plane size mismatch");
  if (!(sigma > 0.0)) return plane;
  const auto k = gaussian_kernel(sigma);
  const long radius = static_cast<long>(k.size() / 2);
  std::vector<double> tmp(h * w, 0.0), out(h * w, 0.0);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x) {
      double s = 0.0;
      for (long d = -radius; d <= radius; ++d)
        s += k[static_cast<std::size_t>(d + radius)] * plane[y * w + reflect_index(static_cast<long>(x) + d, w)];
      tmp[y * w + x] = s;
    }
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x) {
      double s = 0.0;
      for (long d = -radius; d <= radius; ++d)
        s += k[static_cast<std::size_t>(d + radius)] * tmp[reflect_index(static_cast<long>(y) + d, h) * w + x];
      out[y * w + x] = s;
    }
  return out;
}

double sample_bilinear(const double* plane, std::size_t h, std::size_t w, double y, double x) {
  y = std::clamp(y, 0.0, static_cast<double>(h - 1));
  x = std::clamp(x, 0.0, static_cast<double>(w - 1));
  const std::size_t y0 = static_cast<std::size_t>(std::floor(y));
  const std::size_t x0 = static_cast<std::size_t>(std::floor(x));
  const std::size_t y1 = std::min(y0 + 1, h - 1), x1 = std::min(x0 + 1, w - 1);
  const double fy = y - static_cast<double>(y0), fx = x - static_cast<double>(x0);
  const double top = plane[y0 * w + x0] * (1.0 - fx) + plane[y0 * w + x1] * fx;
  const double bot = plane[y1 * w + x0] * (1.0 - fx) + plane[y1 * w + x1] * fx;
  return top * (1.0 - fy) + bot * fy;
}

std::vector<double> bilinear_resize(const std::vector<double>& plane, std::size_t h, std::size_t w,
                                    std::size_t out_h, std::size_t out_w) {
  if (plane.size() != h * w) throw DimensionError("bilinear_resize: plane size mismatch");
  std::vector<double> out(out_h * out_w);
  const double sy = static_cast<double>(h) / static_cast<double>(out_h);
  const double sx = static_cast<double>(w) / static_cast<double>(out_w);
  for (std::size_t ty = 0; ty < out_h; ++ty)
    for (std::size_t tx = 0; tx < out_w; ++tx) {
      const double y = (static_cast<double>(ty) + 0.5) * sy - 0.5;
      const double x = (static_cast<double>(tx) + 0.5) * sx - 0.5;
      out[ty * out_w + tx] = sample_bilinear(plane.data(), h, w, y, x);
    }
  return out;
}

}  // namespace ckad::image
