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

#include "ckad/gemm.hpp"

#include <algorithm>
#include <vector>

#if defined(__AVX512F__)
#include <immintrin.h>
#endif

namespace ckad::gemm {
namespace {

constexpr std::size_t kBlockK = 128;
constexpr std::size_t kBlockN = 512;

void nn_portable(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b, double* c) {
  for (std::size_t j0 = 0; j0 < n; j0 += kBlockN) {
    const std::size_t jn = std::min(n, j0 + kBlockN) - j0;
    for (std::size_t k0 = 0; k0 < k; k0 += kBlockK) {
      const std::size_t kn = std::min(k, k0 + kBlockK);
      std::size_t i = 0;
      for (; i + 4 <= m; i += 4) {
        double* __restrict c0 = c + (i + 0) * n + j0;
        double* __restrict c1 = c + (i + 1) * n + j0;
        double* __restrict c2 = c + (i + 2) * n + j0;
        double* __restrict c3 = c + (i + 3) * n + j0;
        for (std::size_t p = k0; p < kn; ++p) {
          const double a0 = a[(i + 0) * k + p];
          const double a1 = a[(i + 1) * k + p];
          const double a2 = a[(i + 2) * k + p];
          const double a3 = a[(i + 3) * k + p];
          const double* __restrict bp = b + p * n + j0;
          for (std::size_t j = 0; j < jn; ++j) {
            const double bv = bp[j];
            c0[j] += a0 * bv;
            c1[j] += a1 * bv;
            c2[j] += a2 * bv;
            c3[j] += a3 * bv;
          }
        }
      }
      for (; i < m; ++i) {
        double* __restrict ci = c + i * n + j0;
        for (std::size_t p = k0; p < kn; ++p) {
          const double av = a[i * k + p];
          const double* __restrict bp = b + p * n + j0;
          for (std::size_t j = 0; j < jn; ++j) ci[j] += av * bp[j];
        }
      }
    }
  }
}

#if defined(__AVX512F__)
constexpr std::size_t kTileRows = 8;
constexpr std::size_t kTileCols = 16;
constexpr std::size_t kTileK = 256;

// 8 x 16 block of C accumulated in registers over p in [p0, p1).
inline void tile(std::size_t n, std::size_t k, std::size_t p0, std::size_t p1, const double* a,
                 const double* b, double* c) {
  __m512d acc[kTileRows][2];
  for (std::size_t r = 0; r < kTileRows; ++r) acc[r][0] = acc[r][1] = _mm512_setzero_pd();
  for (std::size_t p = p0; p < p1; ++p) {
    const double* bp = b + p * n;
    const __m512d b0 = _mm512_loadu_pd(bp), b1 = _mm512_loadu_pd(bp + 8);
    for (std::size_t r = 0; r < kTileRows; ++r) {
      const __m512d av = _mm512_set1_pd(a[r * k + p]);
      acc[r][0] = _mm512_fmadd_pd(av, b0, acc[r][0]);
      acc[r][1] = _mm512_fmadd_pd(av, b1, acc[r][1]);
    }
  }
  for (std::size_t r = 0; r < kTileRows; ++r) {
    double* cr = c + r * n;
    _mm512_storeu_pd(cr, _mm512_add_pd(_mm512_loadu_pd(cr), acc[r][0]));
    _mm512_storeu_pd(cr + 8, _mm512_add_pd(_mm512_loadu_pd(cr + 8), acc[r][1]));
  }
}

void nn_tiled(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b, double* c) {
  const std::size_t m_full = m - m % kTileRows, n_full = n - n % kTileCols;
  for (std::size_t p0 = 0; p0 < k; p0 += kTileK) {
    const std::size_t p1 = std::min(k, p0 + kTileK);
    for (std::size_t i = 0; i < m_full; i += kTileRows)
      for (std::size_t j = 0; j < n_full; j += kTileCols) tile(n, k, p0, p1, a + i * k, b + j, c + i * n + j);
    // Right edge of the full rows, then the leftover rows.
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t j_begin = i < m_full ? n_full : 0;
      if (j_begin >= n) continue;
      double* ci = c + i * n;
      for (std::size_t p = p0; p < p1; ++p) {
        const double av = a[i * k + p];
        const double* bp = b + p * n;
        for (std::size_t j = j_begin; j < n; ++j) ci[j] += av * bp[j];
      }
    }
  }
}
#endif

}  // namespace

void nn(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b, double* c) {
#if defined(__AVX512F__)
  if (m >= kTileRows && n >= kTileCols) return nn_tiled(m, n, k, a, b, c);
#endif
  nn_portable(m, n, k, a, b, c);
}

void tn(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b, double* c) {
  // Transposing A once keeps the inner loop contiguous.
  std::vector<double> at(m * k);
  for (std::size_t p = 0; p < k; ++p)
    for (std::size_t i = 0; i < m; ++i) at[i * k + p] = a[p * m + i];
  nn(m, n, k, at.data(), b, c);
}

void nt(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b, double* c) {
  std::vector<double> bt(k * n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t p = 0; p < k; ++p) bt[p * n + j] = b[j * k + p];
  nn(m, n, k, a, bt.data(), c);
}

}  // namespace ckad::gemm
