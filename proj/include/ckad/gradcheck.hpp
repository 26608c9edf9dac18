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

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ckad/tensor.hpp"

// Central finite-difference checks of reverse-mode gradients.
namespace ckad::gradcheck {

inline constexpr double kStep = 1e-6;
inline constexpr double kTolerance = 1e-4;
// Denominator floor: gradients below it are compared in absolute terms.
inline constexpr double kFloor = 1e-4;
inline constexpr std::size_t kDefaultProbes = 20;

struct Result {
  std::string name;
  std::size_t probes = 0;
  double max_rel_err = 0.0;
  bool pass() const { return probes > 0 && max_rel_err <= kTolerance; }
};

double rel_error(double analytic, double numeric);

// `f` must rebuild the scalar loss from the current values of `wrt`.
// Probes are coordinates drawn uniformly over all elements of `wrt`.
Result check(const std::string& name, const std::function<Tensor()>& f, std::vector<Tensor> wrt,
             std::size_t probes, std::uint64_t seed);

std::vector<Result> check_ops(std::size_t probes, std::uint64_t seed);
// Eq. 2, 4, 7 (both sides), 8, 9, 11, 12 on a small model.
std::vector<Result> check_losses(std::size_t probes, std::uint64_t seed);

std::string report(const std::vector<Result>& results);
bool all_pass(const std::vector<Result>& results);

}  // namespace ckad::gradcheck
