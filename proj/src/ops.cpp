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

#include "ckad/ops.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

#include "ckad/error.hpp"
#include "ckad/gemm.hpp"

namespace ckad::ops {

using detail::grad_of;
using detail::make_result;

namespace {

using Buffer = std::shared_ptr<const std::vector<double>>;

Buffer values_of(const Tensor& t) { return t.impl()->data; }

void require_same_shape(const char* op, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape())
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                         shape_str(b.shape()));
}

void require_4d(const char* op, const Tensor& x) {
  if (x.ndim() != 4)
    throw DimensionError(std::string(op) + ": expected [N,C,H,W], got " + shape_str(x.shape()));
}

template <typename Fwd, typename Bwd>
Tensor unary(const char* op, const Tensor& x, Fwd fwd, Bwd dfdx) {
  const auto in = values_of(x);
  std::vector<double> out(in->size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = fwd((*in)[i]);
  auto xi = x.impl();
  return make_result(op, x.shape(), std::move(out), {x}, [xi, in, dfdx](std::span<const double> g) {
    if (double* gx = grad_of(xi))
      for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * dfdx((*in)[i]);
  });
}

struct ConvGeometry {
  std::size_t n, c, h, w, k, stride, pad, ho, wo;
  std::size_t rows() const { return c * k * k; }
  std::size_t cols() const { return n * ho * wo; }
};

// col[(c, ky, kx), (n, oy, ox)] = x[n, c, oy*s + ky - p, ox*s + kx - p]
void im2col(const ConvGeometry& g, const double* x, double* col) {
  const std::size_t ncols = g.cols();
  const std::size_t plane = g.ho * g.wo;
  for (std::size_t c = 0; c < g.c; ++c)
    for (std::size_t ky = 0; ky < g.k; ++ky)
      for (std::size_t kx = 0; kx < g.k; ++kx) {
        double* row = col + ((c * g.k + ky) * g.k + kx) * ncols;
        for (std::size_t n = 0; n < g.n; ++n) {
          const double* xp = x + (n * g.c + c) * g.h * g.w;
          double* rp = row + n * plane;
          for (std::size_t oy = 0; oy < g.ho; ++oy) {
            const long iy = static_cast<long>(oy * g.stride + ky) - static_cast<long>(g.pad);
            if (iy < 0 || iy >= static_cast<long>(g.h)) {
              std::fill(rp + oy * g.wo, rp + (oy + 1) * g.wo, 0.0);
              continue;
            }
            for (std::size_t ox = 0; ox < g.wo; ++ox) {
              const long ix = static_cast<long>(ox * g.stride + kx) - static_cast<long>(g.pad);
              rp[oy * g.wo + ox] =
                  (ix < 0 || ix >= static_cast<long>(g.w)) ? 0.0 : xp[iy * g.w + ix];
            }
          }
        }
      }
}

// Adjoint of im2col: scatter-adds col back onto x.
void col2im(const ConvGeometry& g, const double* col, double* x) {
  const std::size_t ncols = g.cols();
  const std::size_t plane = g.ho * g.wo;
  for (std::size_t c = 0; c < g.c; ++c)
    for (std::size_t ky = 0; ky < g.k; ++ky)
      for (std::size_t kx = 0; kx < g.k; ++kx) {
        const double* row = col + ((c * g.k + ky) * g.k + kx) * ncols;
        for (std::size_t n = 0; n < g.n; ++n) {
          double* xp = x + (n * g.c + c) * g.h * g.w;
          const double* rp = row + n * plane;
          for (std::size_t oy = 0; oy < g.ho; ++oy) {
            const long iy = static_cast<long>(oy * g.stride + ky) - static_cast<long>(g.pad);
            if (iy < 0 || iy >= static_cast<long>(g.h)) continue;
            for (std::size_t ox = 0; ox < g.wo; ++ox) {
              const long ix = static_cast<long>(ox * g.stride + kx) - static_cast<long>(g.pad);
              if (ix >= 0 && ix < static_cast<long>(g.w)) xp[iy * g.w + ix] += rp[oy * g.wo + ox];
            }
          }
        }
      }
}

// [N, C, P] <-> [C, N*P]
void nchw_to_cn(const double* x, std::size_t n, std::size_t c, std::size_t p, double* out) {
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < c; ++j)
      std::copy(x + (i * c + j) * p, x + (i * c + j + 1) * p, out + j * n * p + i * p);
}

void cn_to_nchw(const double* x, std::size_t n, std::size_t c, std::size_t p, double* out) {
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < c; ++j)
      std::copy(x + j * n * p + i * p, x + j * n * p + (i + 1) * p, out + (i * c + j) * p);
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape("add", a, b);
  auto pa = values_of(a), pb = values_of(b);
  std::vector<double> out(pa->size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (*pa)[i] + (*pb)[i];
  auto ai = a.impl(), bi = b.impl();
  return make_result("add", a.shape(), std::move(out), {a, b}, [ai, bi](std::span<const double> g) {
    if (double* ga = grad_of(ai))
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    if (double* gb = grad_of(bi))
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i];
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape("sub", a, b);
  auto pa = values_of(a), pb = values_of(b);
  std::vector<double> out(pa->size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (*pa)[i] - (*pb)[i];
  auto ai = a.impl(), bi = b.impl();
  return make_result("sub", a.shape(), std::move(out), {a, b}, [ai, bi](std::span<const double> g) {
    if (double* ga = grad_of(ai))
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    if (double* gb = grad_of(bi))
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape("mul", a, b);
  auto pa = values_of(a), pb = values_of(b);
  std::vector<double> out(pa->size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (*pa)[i] * (*pb)[i];
  auto ai = a.impl(), bi = b.impl();
  return make_result("mul", a.shape(), std::move(out), {a, b},
                     [ai, bi, pa, pb](std::span<const double> g) {
                       if (double* ga = grad_of(ai))
                         for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * (*pb)[i];
                       if (double* gb = grad_of(bi))
                         for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * (*pa)[i];
                     });
}

Tensor scale(const Tensor& x, double s) {
  return unary("scale", x, [s](double v) { return s * v; }, [s](double) { return s; });
}

Tensor add_scalar(const Tensor& x, double s) {
  return unary("add_scalar", x, [s](double v) { return v + s; }, [](double) { return 1.0; });
}

Tensor neg(const Tensor& x) { return scale(x, -1.0); }

Tensor relu(const Tensor& x) {
  return unary(
      "relu", x, [](double v) { return v > 0.0 ? v : 0.0; },
      [](double v) { return v > 0.0 ? 1.0 : 0.0; });
}

Tensor leaky_relu(const Tensor& x, double slope) {
  return unary(
      "leaky_relu", x, [slope](double v) { return v > 0.0 ? v : slope * v; },
      [slope](double v) { return v > 0.0 ? 1.0 : slope; });
}

Tensor softplus(const Tensor& x) {
  return unary(
      "softplus", x,
      [](double v) { return v > 0.0 ? v + std::log1p(std::exp(-v)) : std::log1p(std::exp(v)); },
      [](double v) {
        if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
        const double e = std::exp(v);
        return e / (1.0 + e);
      });
}

Tensor max_elemwise(const Tensor& x, double c) {
  return unary(
      "max_elemwise", x, [c](double v) { return v > c ? v : c; },
      [c](double v) { return v > c ? 1.0 : 0.0; });
}

Tensor sum(const Tensor& x) {
  auto px = values_of(x);
  double s = 0.0;
  for (double v : *px) s += v;
  auto xi = x.impl();
  return make_result("sum", Shape{1}, {s}, {x}, [xi](std::span<const double> g) {
    if (double* gx = grad_of(xi)) {
      const std::size_t n = xi->data->size();
      for (std::size_t i = 0; i < n; ++i) gx[i] += g[0];
    }
  });
}

Tensor mean(const Tensor& x) {
  auto px = values_of(x);
  double s = 0.0;
  for (double v : *px) s += v;
  const double inv = 1.0 / static_cast<double>(px->size());
  auto xi = x.impl();
  return make_result("mean", Shape{1}, {s * inv}, {x}, [xi, inv](std::span<const double> g) {
    if (double* gx = grad_of(xi)) {
      const std::size_t n = xi->data->size();
      for (std::size_t i = 0; i < n; ++i) gx[i] += g[0] * inv;
    }
  });
}

Tensor reshape(const Tensor& x, Shape shape) {
  if (shape_numel(shape) != x.numel())
    throw DimensionError("reshape: " + shape_str(x.shape()) + " -> " + shape_str(shape));
  auto px = values_of(x);
  auto xi = x.impl();
  return make_result("reshape", std::move(shape), std::vector<double>(px->begin(), px->end()), {x},
                     [xi](std::span<const double> g) {
                       if (double* gx = grad_of(xi))
                         for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
                     });
}

Tensor concat_channels(const std::vector<Tensor>& xs) {
  if (xs.empty()) throw DimensionError("concat_channels: no inputs");
  for (const auto& x : xs) require_4d("concat_channels", x);
  const std::size_t n = xs[0].dim(0), h = xs[0].dim(2), w = xs[0].dim(3);
  std::size_t ctot = 0;
  for (const auto& x : xs) {
    if (x.dim(0) != n || x.dim(2) != h || x.dim(3) != w)
      throw DimensionError("concat_channels: incompatible " + shape_str(x.shape()) + " and " +
                           shape_str(xs[0].shape()));
    ctot += x.dim(1);
  }
  const std::size_t plane = h * w;
  std::vector<double> out(n * ctot * plane);
  std::size_t coff = 0;
  for (const auto& x : xs) {
    const std::size_t c = x.dim(1);
    const double* px = x.data().data();
    for (std::size_t i = 0; i < n; ++i)
      std::copy(px + i * c * plane, px + (i + 1) * c * plane, out.data() + (i * ctot + coff) * plane);
    coff += c;
  }
  std::vector<std::shared_ptr<TensorImpl>> impls;
  for (const auto& x : xs) impls.push_back(x.impl());
  return make_result("concat_channels", Shape{n, ctot, h, w}, std::move(out), xs,
                     [impls, n, ctot, plane](std::span<const double> g) {
                       std::size_t coff = 0;
                       for (const auto& xi : impls) {
                         const std::size_t c = xi->shape[1];
                         if (double* gx = grad_of(xi))
                           for (std::size_t i = 0; i < n; ++i)
                             for (std::size_t j = 0; j < c * plane; ++j)
                               gx[i * c * plane + j] += g[(i * ctot + coff) * plane + j];
                         coff += c;
                       }
                     });
}

Tensor concat_batch(const std::vector<Tensor>& xs) {
  if (xs.empty()) throw DimensionError("concat_batch: no inputs");
  Shape rest(xs[0].shape().begin() + 1, xs[0].shape().end());
  std::size_t ntot = 0;
  for (const auto& x : xs) {
    Shape r(x.shape().begin() + 1, x.shape().end());
    if (r != rest)
      throw DimensionError("concat_batch: incompatible " + shape_str(x.shape()) + " and " +
                           shape_str(xs[0].shape()));
    ntot += x.dim(0);
  }
  std::vector<double> out;
  out.reserve(ntot * shape_numel(rest));
  for (const auto& x : xs) out.insert(out.end(), x.data().begin(), x.data().end());
  Shape shape = xs[0].shape();
  shape[0] = ntot;
  std::vector<std::shared_ptr<TensorImpl>> impls;
  for (const auto& x : xs) impls.push_back(x.impl());
  return make_result("concat_batch", std::move(shape), std::move(out), xs,
                     [impls](std::span<const double> g) {
                       std::size_t off = 0;
                       for (const auto& xi : impls) {
                         const std::size_t len = xi->data->size();
                         if (double* gx = grad_of(xi))
                           for (std::size_t j = 0; j < len; ++j) gx[j] += g[off + j];
                         off += len;
                       }
                     });
}

Tensor slice_batch(const Tensor& x, std::size_t begin, std::size_t end) {
  if (begin >= end || end > x.dim(0))
    throw DimensionError("slice_batch: range [" + std::to_string(begin) + "," +
                         std::to_string(end) + ") outside " + shape_str(x.shape()));
  const std::size_t row = x.numel() / x.dim(0);
  Shape shape = x.shape();
  shape[0] = end - begin;
  const double* px = x.data().data();
  std::vector<double> out(px + begin * row, px + end * row);
  auto xi = x.impl();
  return make_result("slice_batch", std::move(shape), std::move(out), {x},
                     [xi, begin, row](std::span<const double> g) {
                       if (double* gx = grad_of(xi))
                         for (std::size_t j = 0; j < g.size(); ++j) gx[begin * row + j] += g[j];
                     });
}

Tensor upsample_nearest2x(const Tensor& x) {
  require_4d("upsample_nearest2x", x);
  const std::size_t nc = x.dim(0) * x.dim(1), h = x.dim(2), w = x.dim(3);
  const std::size_t h2 = 2 * h, w2 = 2 * w;
  const double* px = x.data().data();
  std::vector<double> out(nc * h2 * w2);
  for (std::size_t p = 0; p < nc; ++p)
    for (std::size_t y = 0; y < h2; ++y)
      for (std::size_t xx = 0; xx < w2; ++xx)
        out[(p * h2 + y) * w2 + xx] = px[(p * h + y / 2) * w + xx / 2];
  auto xi = x.impl();
  return make_result("upsample_nearest2x", Shape{x.dim(0), x.dim(1), h2, w2}, std::move(out), {x},
                     [xi, nc, h, w, h2, w2](std::span<const double> g) {
                       if (double* gx = grad_of(xi))
                         for (std::size_t p = 0; p < nc; ++p)
                           for (std::size_t y = 0; y < h2; ++y)
                             for (std::size_t xx = 0; xx < w2; ++xx)
                               gx[(p * h + y / 2) * w + xx / 2] += g[(p * h2 + y) * w2 + xx];
                     });
}

Tensor global_avg_pool(const Tensor& x) {
  require_4d("global_avg_pool", x);
  const std::size_t nc = x.dim(0) * x.dim(1), plane = x.dim(2) * x.dim(3);
  const double* px = x.data().data();
  std::vector<double> out(nc);
  for (std::size_t p = 0; p < nc; ++p) {
    double s = 0.0;
    for (std::size_t j = 0; j < plane; ++j) s += px[p * plane + j];
    out[p] = s / static_cast<double>(plane);
  }
  auto xi = x.impl();
  return make_result("global_avg_pool", Shape{x.dim(0), x.dim(1), 1, 1}, std::move(out), {x},
                     [xi, nc, plane](std::span<const double> g) {
                       if (double* gx = grad_of(xi)) {
                         const double inv = 1.0 / static_cast<double>(plane);
                         for (std::size_t p = 0; p < nc; ++p)
                           for (std::size_t j = 0; j < plane; ++j) gx[p * plane + j] += g[p] * inv;
                       }
                     });
}

Tensor conv2d(const Tensor& input, const Tensor& weight, const std::optional<Tensor>& bias,
              Conv2dOptions opt) {
  require_4d("conv2d", input);
  require_4d("conv2d weight", weight);
  const std::size_t n = input.dim(0), cin = input.dim(1), h = input.dim(2), w = input.dim(3);
  const std::size_t cout = weight.dim(0), k = weight.dim(2);
  if (weight.dim(1) != cin || weight.dim(3) != k)
    throw DimensionError("conv2d: weight " + shape_str(weight.shape()) + " incompatible with input " +
                         shape_str(input.shape()));
  if (opt.stride == 0) throw DimensionError("conv2d: stride must be >= 1");
  if (h + 2 * opt.padding < k || w + 2 * opt.padding < k)
    throw DimensionError("conv2d: kernel larger than padded input " + shape_str(input.shape()));
  if (bias && (bias->ndim() != 1 || bias->dim(0) != cout))
    throw DimensionError("conv2d: bias " + shape_str(bias->shape()) + " for " +
                         std::to_string(cout) + " output channels");
  const std::size_t ho = (h + 2 * opt.padding - k) / opt.stride + 1;
  const std::size_t wo = (w + 2 * opt.padding - k) / opt.stride + 1;
  const ConvGeometry geo{n, cin, h, w, k, opt.stride, opt.padding, ho, wo};
  const std::size_t rows = geo.rows(), cols = geo.cols(), plane = ho * wo;

  auto col = std::make_shared<std::vector<double>>(rows * cols);
  im2col(geo, input.data().data(), col->data());
  std::vector<double> mat(cout * cols, 0.0);
  gemm::nn(cout, cols, rows, weight.data().data(), col->data(), mat.data());
  std::vector<double> out(n * cout * plane);
  cn_to_nchw(mat.data(), n, cout, plane, out.data());
  if (bias) {
    const double* pb = bias->data().data();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t o = 0; o < cout; ++o)
        for (std::size_t p = 0; p < plane; ++p) out[(i * cout + o) * plane + p] += pb[o];
  }

  std::vector<Tensor> inputs{input, weight};
  if (bias) inputs.push_back(*bias);
  auto xi = input.impl(), wi = weight.impl();
  auto bi = bias ? bias->impl() : nullptr;
  auto wv = values_of(weight);
  return make_result("conv2d", Shape{n, cout, ho, wo}, std::move(out), std::move(inputs),
                     [=](std::span<const double> g) {
                       std::vector<double> gmat(cout * cols);
                       nchw_to_cn(g.data(), n, cout, plane, gmat.data());
                       if (double* gw = grad_of(wi)) gemm::nt(cout, rows, cols, gmat.data(), col->data(), gw);
                       if (bi)
                         if (double* gb = grad_of(bi))
                           for (std::size_t o = 0; o < cout; ++o) {
                             double s = 0.0;
                             for (std::size_t j = 0; j < cols; ++j) s += gmat[o * cols + j];
                             gb[o] += s;
                           }
                       if (double* gx = grad_of(xi)) {
                         std::vector<double> gcol(rows * cols, 0.0);
                         gemm::tn(rows, cols, cout, wv->data(), gmat.data(), gcol.data());
                         col2im(geo, gcol.data(), gx);
                       }
                     });
}

Tensor conv_transpose2d(const Tensor& input, const Tensor& weight,
                        const std::optional<Tensor>& bias, std::size_t stride) {
  require_4d("conv_transpose2d", input);
  require_4d("conv_transpose2d weight", weight);
  if (stride == 0) throw DimensionError("conv_transpose2d: stride must be >= 1");
  const std::size_t n = input.dim(0), cin = input.dim(1), h = input.dim(2), w = input.dim(3);
  const std::size_t cout = weight.dim(1), k = weight.dim(2);
  if (weight.dim(0) != cin || weight.dim(3) != k)
    throw DimensionError("conv_transpose2d: weight " + shape_str(weight.shape()) +
                         " incompatible with input " + shape_str(input.shape()));
  if (bias && (bias->ndim() != 1 || bias->dim(0) != cout))
    throw DimensionError("conv_transpose2d: bias " + shape_str(bias->shape()) + " for " +
                         std::to_string(cout) + " output channels");
  const std::size_t ho = (h - 1) * stride + k, wo = (w - 1) * stride + k;
  // Geometry of the forward conv that maps the output back to the input.
  const ConvGeometry geo{n, cout, ho, wo, k, stride, 0, h, w};
  const std::size_t rows = geo.rows(), cols = geo.cols(), plane = h * w;

  auto xmat = std::make_shared<std::vector<double>>(cin * cols);
  nchw_to_cn(input.data().data(), n, cin, plane, xmat->data());
  std::vector<double> col(rows * cols, 0.0);
  gemm::tn(rows, cols, cin, weight.data().data(), xmat->data(), col.data());
  std::vector<double> out(n * cout * ho * wo, 0.0);
  col2im(geo, col.data(), out.data());
  if (bias) {
    const double* pb = bias->data().data();
    const std::size_t oplane = ho * wo;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t o = 0; o < cout; ++o)
        for (std::size_t p = 0; p < oplane; ++p) out[(i * cout + o) * oplane + p] += pb[o];
  }

  std::vector<Tensor> inputs{input, weight};
  if (bias) inputs.push_back(*bias);
  auto xi = input.impl(), wi = weight.impl();
  auto bi = bias ? bias->impl() : nullptr;
  auto wv = values_of(weight);
  return make_result(
      "conv_transpose2d", Shape{n, cout, ho, wo}, std::move(out), std::move(inputs),
      [=](std::span<const double> g) {
        std::vector<double> gcol(rows * cols);
        im2col(geo, g.data(), gcol.data());
        if (double* gx = grad_of(xi)) {
          std::vector<double> gxm(cin * cols, 0.0);
          gemm::nn(cin, cols, rows, wv->data(), gcol.data(), gxm.data());
          std::vector<double> tmp(n * cin * plane);
          cn_to_nchw(gxm.data(), n, cin, plane, tmp.data());
          for (std::size_t j = 0; j < tmp.size(); ++j) gx[j] += tmp[j];
        }
        if (double* gw = grad_of(wi)) gemm::nt(cin, rows, cols, xmat->data(), gcol.data(), gw);
        if (bi)
          if (double* gb = grad_of(bi)) {
            const std::size_t oplane = ho * wo;
            for (std::size_t i = 0; i < n; ++i)
              for (std::size_t o = 0; o < cout; ++o) {
                double s = 0.0;
                for (std::size_t p = 0; p < oplane; ++p) s += g[(i * cout + o) * oplane + p];
                gb[o] += s;
              }
          }
      });
}

Tensor instance_norm(const Tensor& input, const Tensor& gamma, const Tensor& beta, double eps) {
  require_4d("instance_norm", input);
  const std::size_t n = input.dim(0), c = input.dim(1), plane = input.dim(2) * input.dim(3);
  if (gamma.shape() != Shape{c} || beta.shape() != Shape{c})
    throw DimensionError("instance_norm: affine params must be [" + std::to_string(c) + "]");
  if (!(eps > 0.0)) throw DimensionError("instance_norm: eps must be positive");
  const double* px = input.data().data();
  const double* pg = gamma.data().data();
  const double* pb = beta.data().data();
  auto xhat = std::make_shared<std::vector<double>>(n * c * plane);
  auto inv_std = std::make_shared<std::vector<double>>(n * c);
  std::vector<double> out(n * c * plane);
  const double inv_plane = 1.0 / static_cast<double>(plane);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < c; ++j) {
      const std::size_t off = (i * c + j) * plane;
      double m = 0.0;
      for (std::size_t p = 0; p < plane; ++p) m += px[off + p];
      m *= inv_plane;
      double v = 0.0;
      for (std::size_t p = 0; p < plane; ++p) v += (px[off + p] - m) * (px[off + p] - m);
      v *= inv_plane;
      const double is = 1.0 / std::sqrt(v + eps);
      (*inv_std)[i * c + j] = is;
      for (std::size_t p = 0; p < plane; ++p) {
        const double xh = (px[off + p] - m) * is;
        (*xhat)[off + p] = xh;
        out[off + p] = pg[j] * xh + pb[j];
      }
    }
  auto xi = input.impl(), gi = gamma.impl(), bi = beta.impl();
  auto gv = values_of(gamma);
  return make_result(
      "instance_norm", input.shape(), std::move(out), {input, gamma, beta},
      [=](std::span<const double> g) {
        double* gx = grad_of(xi);
        double* gg = grad_of(gi);
        double* gb = grad_of(bi);
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < c; ++j) {
            const std::size_t off = (i * c + j) * plane;
            double sg = 0.0, sgx = 0.0;
            for (std::size_t p = 0; p < plane; ++p) {
              sg += g[off + p];
              sgx += g[off + p] * (*xhat)[off + p];
            }
            if (gg) gg[j] += sgx;
            if (gb) gb[j] += sg;
            if (gx) {
              const double gam = (*gv)[j];
              const double is = (*inv_std)[i * c + j];
              const double mg = sg * inv_plane * gam;
              const double mgx = sgx * inv_plane * gam;
              for (std::size_t p = 0; p < plane; ++p)
                gx[off + p] += is * (gam * g[off + p] - mg - (*xhat)[off + p] * mgx);
            }
          }
      });
}

Tensor cosine_rows(const Tensor& x, const Tensor& y, double eps) {
  if (x.numel() != y.numel() || x.dim(0) != y.dim(0))
    throw DimensionError("cosine_rows: " + shape_str(x.shape()) + " vs " + shape_str(y.shape()));
  const std::size_t n = x.dim(0), d = x.numel() / n;
  auto px = values_of(x), py = values_of(y);
  std::vector<double> out(n);
  auto stats = std::make_shared<std::vector<double>>(4 * n);  // nx, ny, mx, my
  for (std::size_t i = 0; i < n; ++i) {
    double dot = 0.0, sx = 0.0, sy = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double a = (*px)[i * d + j], b = (*py)[i * d + j];
      dot += a * b;
      sx += a * a;
      sy += b * b;
    }
    const double nx = std::sqrt(sx), ny = std::sqrt(sy);
    const double mx = std::max(nx, eps), my = std::max(ny, eps);
    out[i] = dot / (mx * my);
    (*stats)[4 * i + 0] = nx;
    (*stats)[4 * i + 1] = ny;
    (*stats)[4 * i + 2] = mx;
    (*stats)[4 * i + 3] = my;
  }
  auto cosv = std::make_shared<std::vector<double>>(out);
  auto xi = x.impl(), yi = y.impl();
  return make_result(
      "cosine_rows", Shape{n}, std::move(out), {x, y}, [=](std::span<const double> g) {
        double* gx = grad_of(xi);
        double* gy = grad_of(yi);
        for (std::size_t i = 0; i < n; ++i) {
          const double nx = (*stats)[4 * i], ny = (*stats)[4 * i + 1];
          const double mx = (*stats)[4 * i + 2], my = (*stats)[4 * i + 3];
          const double cs = (*cosv)[i];
          const double inv = 1.0 / (mx * my);
          const double cx = nx > eps ? cs / (nx * nx) : 0.0;
          const double cy = ny > eps ? cs / (ny * ny) : 0.0;
          for (std::size_t j = 0; j < d; ++j) {
            const double a = (*px)[i * d + j], b = (*py)[i * d + j];
            if (gx) gx[i * d + j] += g[i] * (b * inv - cx * a);
            if (gy) gy[i * d + j] += g[i] * (a * inv - cy * b);
          }
        }
      });
}

Tensor cosine_flat(const Tensor& x, const Tensor& y, double eps) {
  if (x.numel() != y.numel())
    throw DimensionError("cosine_flat: " + shape_str(x.shape()) + " vs " + shape_str(y.shape()));
  return cosine_rows(reshape(x, Shape{1, x.numel()}), reshape(y, Shape{1, y.numel()}), eps);
}

}  // namespace ckad::ops
