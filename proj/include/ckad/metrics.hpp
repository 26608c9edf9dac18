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

#include <span>
#include <string>
#include <vector>

#include "ckad/tensor.hpp"

namespace ckad {

inline constexpr double kDefaultFprLimit = 0.3;

// Mann-Whitney estimate with ties counted half. labels: 1 anomalous, 0 normal.
double auroc(std::span<const double> scores, std::span<const int> labels);

struct F1Result {
  double f1 = 0.0;
  double acc = 0.0;
  double threshold = 0.0;  // positives are score >= threshold
};
// Sweeps the minimum score and every midpoint between consecutive distinct
// scores; the largest maximising threshold wins ties.
F1Result best_f1_acc(std::span<const double> scores, std::span<const int> labels);

// Maps and masks are [H, W]; mask pixels are 0 or 1. Normal images pass
// all-zero masks.
double pixel_auroc(const std::vector<Tensor>& maps, const std::vector<Tensor>& masks);

// Labels every 8-connected foreground component 1..count; background 0.
std::vector<int> label_components(const Tensor& mask, int* count);

// Per-region overlap integrated over false-positive rate up to fpr_limit
// (trapezoid rule from (0, 0), the last segment interpolated at the limit)
// and divided by fpr_limit.
double pro(const std::vector<Tensor>& maps, const std::vector<Tensor>& masks,
           double fpr_limit = kDefaultFprLimit);

struct HistogramRow {
  double lo = 0.0, hi = 0.0;
  std::size_t normal = 0, anomalous = 0;
};
std::vector<HistogramRow> score_histogram(std::span<const double> scores, std::span<const int> labels,
                                          std::size_t bins);
std::string histogram_csv(const std::vector<HistogramRow>& rows);

struct MetricsReport {
  double auroc = 0.0;
  double f1 = 0.0;
  double acc = 0.0;
  double threshold = 0.0;
  double pixel_auroc = 0.0;
  double pro = 0.0;
};
std::string metrics_csv(const MetricsReport& r);

}  // namespace ckad
