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

#include <optional>
#include <vector>

#include "ckad/tensor.hpp"

// Differentiable operations. Image-like tensors are [N, C, H, W]; every op
// works per sample, so samples in a batch never interact.
namespace ckad::ops {

inline constexpr double kCosineEps = 1e-12;
inline constexpr double kInstanceNormEps = 1e-5;

// Elementwise, identical shapes.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& x, double s);
Tensor add_scalar(const Tensor& x, double s);
Tensor neg(const Tensor& x);

Tensor relu(const Tensor& x);
Tensor leaky_relu(const Tensor& x, double slope);
// log(1 + exp(x)) without overflow.
Tensor softplus(const Tensor& x);
// max(x, c) against a constant. At a tie the value is c and the gradient
// is zero.
Tensor max_elemwise(const Tensor& x, double c);

// Full reductions to shape [1].
Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);

Tensor reshape(const Tensor& x, Shape shape);
// Concatenate [N, C_i, H, W] along channels.
Tensor concat_channels(const std::vector<Tensor>& xs);
// Concatenate along the leading (batch) axis; trailing dims must agree.
Tensor concat_batch(const std::vector<Tensor>& xs);
// Rows [begin, end) of the leading axis.
Tensor slice_batch(const Tensor& x, std::size_t begin, std::size_t end);
Tensor upsample_nearest2x(const Tensor& x);
// [N, C, H, W] -> [N, C, 1, 1]
Tensor global_avg_pool(const Tensor& x);

struct Conv2dOptions {
  std::size_t stride = 1;
  std::size_t padding = 0;
};

// input [N, C_in, H, W], weight [C_out, C_in, k, k], bias [C_out].
// Output [N, C_out, (H + 2p - k) / s + 1, (W + 2p - k) / s + 1].
Tensor conv2d(const Tensor& input, const Tensor& weight, const std::optional<Tensor>& bias,
              Conv2dOptions opt = {});

// input [N, C_in, H, W], weight [C_in, C_out, k, k], bias [C_out].
// Output [N, C_out, (H - 1) s + k, (W - 1) s + k]; the adjoint of conv2d
// with the same weight, stride and zero padding.
Tensor conv_transpose2d(const Tensor& input, const Tensor& weight,
                        const std::optional<Tensor>& bias, std::size_t stride);

// Per-sample, per-channel standardization over H*W, then gamma * x + beta.
Tensor instance_norm(const Tensor& input, const Tensor& gamma, const Tensor& beta,
                     double eps = kInstanceNormEps);

// Cosine similarity of each sample's flattened contents: x, y [N, ...] ->
// [N]. Norms are floored at eps.
Tensor cosine_rows(const Tensor& x, const Tensor& y, double eps = kCosineEps);
// Cosine similarity of the two tensors flattened to one vector each -> [1].
Tensor cosine_flat(const Tensor& x, const Tensor& y, double eps = kCosineEps);

}  // namespace ckad::ops
