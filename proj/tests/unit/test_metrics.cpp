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


#include <doctest.h>

#include <random>

#include "ckad/error.hpp"
#include "ckad/metrics.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace ckad;

namespace {

// Scores on a coarse grid so that ties are common.
void random_case(std::mt19937_64& rng, std::size_t n, std::vector<double>* s, std::vector<int>* y) {
  std::uniform_int_distribution<int> level(0, 9);
  std::bernoulli_distribution coin(0.4);
  s->clear();
  y->clear();
  for (std::size_t i = 0; i < n; ++i) {
    const int lab = coin(rng) ? 1 : 0;
    y->push_back(lab);
    s->push_back(0.1 * level(rng) + 0.15 * lab);
  }
  (*y)[0] = 1;
  (*y)[1] = 0;
}

Tensor plane(std::size_t h, std::size_t w, const std::vector<double>& v) { return Tensor({h, w}, v); }

std::vector<double> as_double(const std::vector<int>& v) { return {v.begin(), v.end()}; }

}  // namespace

TEST_CASE("auroc examples") {
  std::vector<double> s{0.1, 0.9};
  std::vector<int> y{0, 1};
  CHECK(auroc(s, y) == 1.0);
  std::vector<double> eq{0.3, 0.3, 0.3};
  std::vector<int> y3{0, 1, 1};
  CHECK(auroc(eq, y3) == 0.5);
  std::vector<int> one_class{1, 1};
  CHECK_THROWS_AS(auroc(s, one_class), ConfigError);
}

TEST_CASE("auroc matches the pairwise oracle on random cases") {
  std::mt19937_64 rng(5);
  std::vector<double> s;
  std::vector<int> y;
  for (int c = 0; c < 100; ++c) {
    random_case(rng, 10 + c % 41, &s, &y);
    CHECK(std::abs(auroc(s, y) - oracle::auroc(s, y)) <= 1e-12);
  }
}

TEST_CASE("best_f1_acc examples") {
  std::vector<double> s{0.1, 0.2, 0.8, 0.9};
  std::vector<int> y{0, 0, 1, 1};
  F1Result r = best_f1_acc(s, y);
  CHECK(r.f1 == 1.0);
  CHECK(r.acc == 1.0);
  CHECK(r.threshold == doctest::Approx(0.5));
  std::vector<double> ten{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.85, 0.99};
  std::vector<int> top(10, 0);
  top[9] = 1;
  CHECK(best_f1_acc(ten, top).f1 == 1.0);
  // All positives tied at the maximum score.
  std::vector<double> tied{0.2, 0.5, 0.9, 0.9, 0.9};
  std::vector<int> yt{0, 1, 1, 1, 0};
  auto o = oracle::best_f1(tied, yt);
  auto b = best_f1_acc(tied, yt);
  CHECK(b.f1 == doctest::Approx(o.f1).epsilon(1e-15));
  CHECK(b.acc == doctest::Approx(o.acc).epsilon(1e-15));
}

TEST_CASE("best_f1_acc matches exhaustive enumeration") {
  std::mt19937_64 rng(6);
  std::vector<double> s;
  std::vector<int> y;
  for (int c = 0; c < 100; ++c) {
    random_case(rng, 4 + c % 12, &s, &y);
    auto o = oracle::best_f1(s, y);
    auto r = best_f1_acc(s, y);
    CHECK(std::abs(r.f1 - o.f1) <= 1e-12);
    CHECK(std::abs(r.acc - o.acc) <= 1e-12);
    // The threshold selects the same rule: it lies just at or below the cut.
    std::size_t same = 0;
    for (double v : s) same += (v >= r.threshold) == (v >= o.cut);
    CHECK(same == s.size());
  }
}

TEST_CASE("pixel auroc equals auroc over all pixels") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0, 1);
  for (int c = 0; c < 100; ++c) {
    std::vector<Tensor> maps, masks;
    std::vector<double> flat;
    std::vector<int> lab;
    for (int i = 0; i < 3; ++i) {
      std::vector<double> m(16), k(16);
      for (int p = 0; p < 16; ++p) {
        k[p] = (i == 0 && p < 3) || u(rng) < 0.1 ? 1.0 : 0.0;
        m[p] = std::round(u(rng) * 8) / 8 + 0.2 * k[p];
        flat.push_back(m[p]);
        lab.push_back(static_cast<int>(k[p]));
      }
      maps.push_back(plane(4, 4, m));
      masks.push_back(plane(4, 4, k));
    }
    CHECK(std::abs(pixel_auroc(maps, masks) - oracle::auroc(flat, lab)) <= 1e-12);
  }
}

TEST_CASE("connected components use 8-connectivity") {
  Tensor m = plane(3, 3, {1, 0, 0, 0, 1, 0, 0, 0, 1});
  int n = 0;
  auto lab = label_components(m, &n);
  CHECK(n == 1);
  Tensor two = plane(3, 3, {1, 0, 1, 0, 0, 0, 1, 0, 1});
  label_components(two, &n);
  CHECK(n == 4);
  CHECK_THROWS_AS(label_components(plane(1, 2, {0.5, 0}), &n), ConfigError);
}

TEST_CASE("pro examples") {
  std::vector<double> mk{0, 1, 1, 0, 0, 1, 1, 0, 0, 0, 0, 0, 1, 0, 0, 0};
  Tensor mask = plane(4, 4, mk);
  CHECK(pro({plane(4, 4, mk)}, {mask}) == 1.0);
  Tensor flat = plane(4, 4, std::vector<double>(16, 0.3));
  // A constant map gives the straight line from (0, 0) to (1, 1).
  CHECK(pro({flat}, {mask}, 1.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(pro({flat}, {mask}, 0.3) == doctest::Approx(0.15).epsilon(1e-15));
  CHECK_THROWS_AS(pro({flat}, {plane(4, 4, std::vector<double>(16, 0.0))}), ConfigError);
  CHECK_THROWS_AS(pro({flat}, {mask}, 0.0), ConfigError);
}

TEST_CASE("pro matches exhaustive enumeration on 4x4 cases") {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> level(0, 5);
  std::bernoulli_distribution px(0.25);
  for (int c = 0; c < 100; ++c) {
    std::vector<Tensor> maps, masks;
    std::vector<std::vector<double>> om;
    std::vector<std::vector<int>> ok;
    for (int i = 0; i < 2; ++i) {
      std::vector<double> m(16);
      std::vector<int> k(16);
      for (int p = 0; p < 16; ++p) {
        k[p] = (p == 5 && i == 0) || px(rng) ? 1 : 0;
        m[p] = 0.1 * level(rng) + 0.2 * k[p];
      }
      if (i == 0) k[15] = 0;
      om.push_back(m);
      ok.push_back(k);
      maps.push_back(plane(4, 4, m));
      masks.push_back(plane(4, 4, as_double(k)));
    }
    for (double lim : {0.3, 0.05, 1.0})
      CHECK(std::abs(pro(maps, masks, lim) - oracle::pro(om, ok, 4, 4, lim)) <= 1e-12);
  }
}

TEST_CASE("histogram and csv output") {
  std::vector<double> s{0.0, 0.5, 1.0, 1.0};
  std::vector<int> y{0, 1, 1, 0};
  auto rows = score_histogram(s, y, 2);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].normal == 1);
  CHECK(rows[1].anomalous == 2);
  CHECK(rows[1].hi == 1.0);
  auto same = score_histogram(std::vector<double>{2.0, 2.0}, std::vector<int>{0, 1}, 4);
  CHECK(same[0].lo == 2.0);
  CHECK(same[3].hi == 3.0);
  CHECK(same[0].normal + same[0].anomalous == 2);
  CHECK_THROWS_AS(score_histogram(s, y, 1), ConfigError);
  CHECK(histogram_csv(rows).rfind("bin_lo,bin_hi,count_normal,count_anomalous\n", 0) == 0);
  MetricsReport r{0.75, 0.5, 0.25, 0.1, 1.0, 0.0};
  const std::string csv = metrics_csv(r);
  CHECK(csv.rfind("metric,value\n", 0) == 0);
  CHECK(csv.find("auroc,0.75\n") != std::string::npos);
  CHECK(csv.find("pro,0\n") != std::string::npos);
}
