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

#include <cstddef>
#include <vector>

// Plain 2-D float-image helpers (no autodiff) shared by scoring and data
// generation. Images are row-major H x W planes.
namespace ckad::image {

// Normalized 1-D Gaussian taps, radius ceil(4 sigma). sigma must be > 0.
std::vector<double> gaussian_kernel(double sigma);

// Mirror index into [0, n) without repeating the edge sample (... 2 1 | 0 1 2 ... n-1 | n-2 ...).
std::size_t reflect_index(long i, std::size_t n);

// Separable Gaussian smoothing with reflect padding. sigma <= 0 returns the
// input unchanged.
std::vector<double> gaussian_blur(const std::vector<double>& plane, std::size_t h, std::size_t w,
                                  double sigma);

// Bilinear resize with the half-pixel-centre convention: source coordinate
// (t + 0.5) * (in / out) - 0.5, clamped to the valid range.
std::vector<double> bilinear_resize(const std::vector<double>& plane, std::size_t h, std::size_t w,
                                    std::size_t out_h, std::size_t out_w);

// Bilinear sample at fractional (y, x), clamping to the border.
double sample_bilinear(const double* plane, std::size_t h, std::size_t w, double y, double x);

}  // namespace ckad::image
