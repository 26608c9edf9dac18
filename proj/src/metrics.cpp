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

#include "ckad/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "ckad/error.hpp"

namespace ckad {
namespace {

void check_labels(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw DimensionError("scores and labels differ in length");
  bool pos = false, neg = false;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) throw ConfigError("labels must be 0 or 1");
    if (!std::isfinite(scores[i])) throw NumericError("non-finite score");
    (labels[i] ? pos : neg) = true;
  }
  if (!pos || !neg) throw ConfigError("both classes must be present");
}

std::vector<std::size_t> order_by_score(std::span<const double> scores) {
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  return idx;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void require_binary(std::span<const double> mask) {
  for (double v : mask)
    if (v != 0.0 && v != 1.0) throw ConfigError("mask pixels must be 0 or 1");
}

void pool_pixels(const std::vector<Tensor>& maps, const std::vector<Tensor>& masks,
                 std::vector<double>& scores, std::vector<int>& labels) {
  if (maps.size() != masks.size()) throw DimensionError("maps and masks differ in count");
  for (std::size_t i = 0; i < maps.size(); ++i) {
    if (maps[i].shape() != masks[i].shape())
      throw DimensionError("map " + std::to_string(i) + " does not match its mask");
    const auto m = maps[i].data();
    const auto k = masks[i].data();
    require_binary(k);
    scores.insert(scores.end(), m.begin(), m.end());
    for (double v : k) labels.push_back(v > 0.5 ? 1 : 0);
  }
}

}  // namespace

double auroc(std::span<const double> scores, std::span<const int> labels) {
  check_labels(scores, labels);
  const auto idx = order_by_score(scores);
  double u = 0.0, neg_below = 0.0, n_pos = 0.0;
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    double pos = 0.0, neg = 0.0;
    while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) {
      (labels[idx[j]] ? pos : neg) += 1.0;
      ++j;
    }
    u += pos * (neg_below + 0.5 * neg);
    neg_below += neg;
    n_pos += pos;
    i = j;
  }
  return u / (n_pos * neg_below);
}

F1Result best_f1_acc(std::span<const double> scores, std::span<const int> labels) {
  check_labels(scores, labels);
  const auto idx = order_by_score(scores);
  const std::uint64_t n = idx.size();
  std::uint64_t total_pos = 0;
  for (int l : labels) total_pos += static_cast<std::uint64_t>(l);
  // Walk thresholds upward; everything at or above the current group is positive.
  std::uint64_t tp = total_pos, fp = n - total_pos;
  std::uint64_t best_num = 0, best_den = 1, best_tp = 0, best_fp = 0;
  double best_t = 0.0;
  bool have = false;
  double prev = 0.0;
  for (std::size_t i = 0; i < idx.size();) {
    const double t = i == 0 ? scores[idx[0]] : 0.5 * (prev + scores[idx[i]]);
    const std::uint64_t fn = total_pos - tp;
    const std::uint64_t num = 2 * tp, den = 2 * tp + fp + fn;
    // num/den >= best_num/best_den, exact in integers.
    if (!have || num * best_den >= best_num * den) {
      best_num = num;
      best_den = den;
      best_tp = tp;
      best_fp = fp;
      best_t = t;
      have = true;
    }
    std::size_t j = i;
    while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) {
      (labels[idx[j]] ? tp : fp) -= 1;
      ++j;
    }
    prev = scores[idx[i]];
    i = j;
  }
  F1Result r;
  r.f1 = best_den ? static_cast<double>(best_num) / static_cast<double>(best_den) : 0.0;
  const std::uint64_t tn = (n - total_pos) - best_fp;
  r.acc = static_cast<double>(best_tp + tn) / static_cast<double>(n);
  r.threshold = best_t;
  return r;
}

double pixel_auroc(const std::vector<Tensor>& maps, const std::vector<Tensor>& masks) {
  std::vector<double> s;
  std::vector<int> l;
  pool_pixels(maps, masks, s, l);
  return auroc(s, l);
}

std::vector<int> label_components(const Tensor& mask, int* count) {
  if (mask.ndim() != 2) throw DimensionError("mask must be [H, W]");
  const long h = static_cast<long>(mask.dim(0)), w = static_cast<long>(mask.dim(1));
  const auto m = mask.data();
  require_binary(m);
  std::vector<int> lab(m.size(), 0);
  int next = 0;
  std::vector<long> stack;
  for (long start = 0; start < h * w; ++start) {
    if (m[start] <= 0.5 || lab[start]) continue;
    lab[start] = ++next;
    stack.push_back(start);
    while (!stack.empty()) {
      const long p = stack.back();
      stack.pop_back();
      const long y = p / w, x = p % w;
      for (long dy = -1; dy <= 1; ++dy)
        for (long dx = -1; dx <= 1; ++dx) {
          const long yy = y + dy, xx = x + dx;
          if (yy < 0 || yy >= h || xx < 0 || xx >= w) continue;
          const long q = yy * w + xx;
          if (m[q] > 0.5 && !lab[q]) {
            lab[q] = next;
            stack.push_back(q);
          }
        }
    }
  }
  if (count) *count = next;
  return lab;
}

double pro(const std::vector<Tensor>& maps, const std::vector<Tensor>& masks, double fpr_limit) {
  if (!(fpr_limit > 0.0 && fpr_limit <= 1.0)) throw ConfigError("fpr limit must be in (0, 1]");
  if (maps.size() != masks.size()) throw DimensionError("maps and masks differ in count");
  std::vector<double> scores;
  std::vector<int> region;  // -1 for normal pixels
  std::vector<double> region_size;
  for (std::size_t i = 0; i < maps.size(); ++i) {
    if (maps[i].shape() != masks[i].shape())
      throw DimensionError("map " + std::to_string(i) + " does not match its mask");
    int count = 0;
    const auto lab = label_components(masks[i], &count);
    const int base = static_cast<int>(region_size.size());
    region_size.resize(region_size.size() + static_cast<std::size_t>(count), 0.0);
    const auto m = maps[i].data();
    for (std::size_t p = 0; p < lab.size(); ++p) {
      if (!std::isfinite(m[p])) throw NumericError("non-finite score");
      scores.push_back(m[p]);
      region.push_back(lab[p] ? base + lab[p] - 1 : -1);
      if (lab[p]) region_size[static_cast<std::size_t>(base + lab[p] - 1)] += 1.0;
    }
  }
  if (region_size.empty()) throw ConfigError("PRO needs at least one anomalous region");
  const double n_neg = static_cast<double>(std::count(region.begin(), region.end(), -1));
  if (n_neg == 0.0) throw ConfigError("PRO needs normal pixels");
  const double n_regions = static_cast<double>(region_size.size());

  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  double area = 0.0, fpr_prev = 0.0, ov_prev = 0.0, fp = 0.0, overlap_sum = 0.0;
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) {
      const int r = region[idx[j]];
      if (r < 0) fp += 1.0;
      else overlap_sum += 1.0 / region_size[static_cast<std::size_t>(r)];
      ++j;
    }
    i = j;
    const double fpr = fp / n_neg, ov = overlap_sum / n_regions;
    if (fpr >= fpr_limit) {
      const double t = fpr > fpr_prev ? (fpr_limit - fpr_prev) / (fpr - fpr_prev) : 0.0;
      const double ov_lim = ov_prev + t * (ov - ov_prev);
      area += 0.5 * (ov_prev + ov_lim) * (fpr_limit - fpr_prev);
      return area / fpr_limit;
    }
    area += 0.5 * (ov_prev + ov) * (fpr - fpr_prev);
    fpr_prev = fpr;
    ov_prev = ov;
  }
  return area / fpr_limit;  // unreachable: the last group always reaches fpr = 1
}

std::vector<HistogramRow> score_histogram(std::span<const double> scores, std::span<const int> labels,
                                          std::size_t bins) {
  if (bins < 2) throw ConfigError("histogram needs at least 2 bins");
  if (scores.size() != labels.size()) throw DimensionError("scores and labels differ in length");
  double lo = 0.0, hi = 1.0;
  if (!scores.empty()) {
    lo = *std::min_element(scores.begin(), scores.end());
    hi = *std::max_element(scores.begin(), scores.end());
    if (hi == lo) hi = lo + 1.0;
  }
  const double width = (hi - lo) / static_cast<double>(bins);
  std::vector<HistogramRow> rows(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    rows[b].lo = lo + width * static_cast<double>(b);
    rows[b].hi = b + 1 == bins ? hi : lo + width * static_cast<double>(b + 1);
  }
  for (std::size_t i = 0; i < scores.size(); ++i) {
    auto b = static_cast<std::size_t>(std::floor((scores[i] - lo) / width));
    b = std::min(b, bins - 1);
    (labels[i] ? rows[b].anomalous : rows[b].normal) += 1;
  }
  return rows;
}

std::string histogram_csv(const std::vector<HistogramRow>& rows) {
  std::ostringstream os;
  os << "bin_lo,bin_hi,count_normal,count_anomalous\n";
  for (const auto& r : rows) os << fmt(r.lo) << ',' << fmt(r.hi) << ',' << r.normal << ',' << r.anomalous << '\n';
  return os.str();
}

std::string metrics_csv(const MetricsReport& r) {
  std::ostringstream os;
  os << "metric,value\n"
     << "auroc," << fmt(r.auroc) << '\n'
     << "f1," << fmt(r.f1) << '\n'
     << "acc," << fmt(r.acc) << '\n'
     << "threshold," << fmt(r.threshold) << '\n'
     << "pixel_auroc," << fmt(r.pixel_auroc) << '\n'
     << "pro," << fmt(r.pro) << '\n';
  return os.str();
}

}  // namespace ckad
