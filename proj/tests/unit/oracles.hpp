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

// Brute-force reference implementations for the metric tests.

#include <algorithm>
#include <cstddef>
#include <functional>
#include <set>
#include <vector>

namespace oracle {

// Pairwise comparison over every (anomalous, normal) pair, ties count half.
inline double auroc(const std::vector<double>& s, const std::vector<int>& y) {
  double wins = 0.0, pairs = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[i] != 1 || y[j] != 0) continue;
      pairs += 1.0;
      wins += s[i] > s[j] ? 1.0 : s[i] == s[j] ? 0.5 : 0.0;
    }
  return wins / pairs;
}

struct F1Point {
  double f1 = 0.0, acc = 0.0;
  double cut = 0.0;  // positives are score >= cut; cut is one of the scores
};

// Every "score >= v" rule for v a distinct score; largest v wins ties.
inline F1Point best_f1(const std::vector<double>& s, const std::vector<int>& y) {
  std::set<double> cuts(s.begin(), s.end());
  F1Point best{-1.0, 0.0, 0.0};
  for (double v : cuts) {
    double tp = 0, fp = 0, fn = 0, tn = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      const bool pos = s[i] >= v;
      if (y[i]) (pos ? tp : fn) += 1;
      else (pos ? fp : tn) += 1;
    }
    const double f1 = 2 * tp / (2 * tp + fp + fn);
    if (f1 >= best.f1) best = {f1, (tp + tn) / static_cast<double>(s.size()), v};
  }
  return best;
}

// 8-connected components by explicit flood fill.
inline std::vector<std::vector<std::size_t>> components(const std::vector<int>& mask, std::size_t h,
                                                         std::size_t w) {
  std::vector<int> seen(mask.size(), 0);
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t p = 0; p < mask.size(); ++p) {
    if (!mask[p] || seen[p]) continue;
    std::vector<std::size_t> comp, stack{p};
    seen[p] = 1;
    while (!stack.empty()) {
      const std::size_t q = stack.back();
      stack.pop_back();
      comp.push_back(q);
      const long qy = static_cast<long>(q / w), qx = static_cast<long>(q % w);
      for (long dy = -1; dy <= 1; ++dy)
        for (long dx = -1; dx <= 1; ++dx) {
          const long ny = qy + dy, nx = qx + dx;
          if (ny < 0 || nx < 0 || ny >= static_cast<long>(h) || nx >= static_cast<long>(w)) continue;
          const auto r = static_cast<std::size_t>(ny) * w + static_cast<std::size_t>(nx);
          if (mask[r] && !seen[r]) {
            seen[r] = 1;
            stack.push_back(r);
          }
        }
    }
    out.push_back(comp);
  }
  return out;
}

// For each distinct threshold, from the highest down, recount FPR and mean
// region recall from scratch; integrate the polyline from (0, 0) up to the
// limit and normalize by it.
inline double pro(const std::vector<std::vector<double>>& maps, const std::vector<std::vector<int>>& masks,
                  std::size_t h, std::size_t w, double limit) {
  std::vector<std::vector<std::vector<std::size_t>>> regions;
  std::set<double, std::greater<>> cuts;
  double negatives = 0;
  for (std::size_t i = 0; i < maps.size(); ++i) {
    regions.push_back(components(masks[i], h, w));
    for (std::size_t p = 0; p < maps[i].size(); ++p) {
      cuts.insert(maps[i][p]);
      negatives += masks[i][p] ? 0 : 1;
    }
  }
  std::vector<std::pair<double, double>> pts{{0.0, 0.0}};
  for (double t : cuts) {
    double fp = 0, overlap = 0, count = 0;
    for (std::size_t i = 0; i < maps.size(); ++i) {
      for (std::size_t p = 0; p < maps[i].size(); ++p) fp += (!masks[i][p] && maps[i][p] >= t) ? 1 : 0;
      for (const auto& r : regions[i]) {
        double hit = 0;
        for (std::size_t p : r) hit += maps[i][p] >= t ? 1 : 0;
        overlap += hit / static_cast<double>(r.size());
        count += 1;
      }
    }
    pts.emplace_back(fp / negatives, overlap / count);
  }
  double area = 0;
  for (std::size_t k = 1; k < pts.size(); ++k) {
    auto [x0, y0] = pts[k - 1];
    auto [x1, y1] = pts[k];
    if (x1 >= limit) {
      const double y = x1 > x0 ? y0 + (y1 - y0) * (limit - x0) / (x1 - x0) : y0;
      return (area + 0.5 * (y0 + y) * (limit - x0)) / limit;
    }
    area += 0.5 * (y0 + y1) * (x1 - x0);
  }
  return area / limit;
}

}  // namespace oracle
