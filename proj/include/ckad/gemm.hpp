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

// Row-major dense kernels backing the convolutions. All of them accumulate
// into C and use a fixed summation order, so results are bitwise
// reproducible.
namespace ckad::gemm {

// C[M,N] += A[M,K] * B[K,N]
void nn(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b, double* c);

// C[M,N] += A[K,M]^T * B[K,N]
void tn(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b, double* c);

// C[M,N] += A[M,K] * B[N,K]^T
void nt(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b, double* c);

}  // namespace ckad::gemm
