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

#include <algorithm>
#include <cmath>

#include "ckad/error.hpp"
#include "ckad/image_ops.hpp"
#include "ckad/scoring.hpp"
#include "helpers.hpp"

using namespace ckad;

namespace {

FeaturePyramid pyramid(std::uint64_t seed) {
  FeaturePyramid p;
  p.scales = {2, 3};
  p.maps = {testutil::randn({4, 8, 8}, seed), testutil::randn({6, 4, 4}, seed + 1)};
  return p;
}

FeaturePyramid copy(const FeaturePyramid& p) {
  FeaturePyramid q = p;
  for (auto& m : q.maps) m = m.clone();
  return q;
}

}  // namespace

TEST_CASE("perfect reconstruction gives an all-zero map") {
  FeaturePyramid p = pyramid(1);
  ScoreMap m = score_map(p, copy(p), 32, 32);
  CHECK(m.values.shape() == Shape{32, 32});
  for (double v : m.values.data()) CHECK(std::abs(v) < 1e-14);
}

TEST_CASE("position error is 1 - cos over channels") {
  Tensor f({2, 1, 2}, std::vector<double>{1, 1, 0, 1});
  Tensor r({2, 1, 2}, std::vector<double>{0, -1, 1, -1});
  auto e = position_error(f, r);
  REQUIRE(e.size() == 2);
  CHECK(e[0] == doctest::Approx(1.0));  // (1,0) vs (0,1)
  CHECK(e[1] == doctest::Approx(2.0));  // anti-aligned
}

TEST_CASE("one bad patch gives a localized blob") {
  FeaturePyramid p = pyramid(2);
  FeaturePyramid r = copy(p);
  // Flip position (1, 2) of the 8x8 scale.
  for (std::size_t c = 0; c < 4; ++c) {
    auto d = r.maps[0].mutable_data();
    d[c * 64 + 1 * 8 + 2] = -d[c * 64 + 1 * 8 + 2];
  }
  ScoreMap m = score_map(p, r, 32, 32, 1.0);
  const auto v = m.values.data();
  const auto best = static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
  const std::size_t by = best / 32, bx = best % 32;
  // The patch covers rows 4..7 and columns 8..11 at 4x upsampling.
  CHECK(by >= 4);
  CHECK(by <= 7);
  CHECK(bx >= 8);
  CHECK(bx <= 11);
  CHECK(v[31 * 32 + 31] < 1e-6 * v[best]);
}

TEST_CASE("sigma 0 disables smoothing") {
  FeaturePyramid p = pyramid(3), r = pyramid(30);
  ScoreMap m = score_map(p, r, 16, 16, 0.0);
  auto e0 = image::bilinear_resize(position_error(p.maps[0], r.maps[0]), 8, 8, 16, 16);
  auto e1 = image::bilinear_resize(position_error(p.maps[1], r.maps[1]), 4, 4, 16, 16);
  for (std::size_t i = 0; i < 256; ++i) CHECK(m.values.at(i) == doctest::Approx(e0[i] + e1[i]).epsilon(1e-14));
  ScoreMap s = score_map(p, r, 16, 16, 2.0);
  double sum0 = 0, sum1 = 0;
  for (std::size_t i = 0; i < 256; ++i) {
    sum0 += m.values.at(i);
    sum1 += s.values.at(i);
  }
  // Reflect-padded normalized blur keeps the total roughly unchanged.
  CHECK(sum1 == doctest::Approx(sum0).epsilon(0.05));
}

TEST_CASE("image score top-k") {
  ScoreMap m{Tensor({2, 2}, std::vector<double>{4, 3, 2, 1}), "x"};
  CHECK(image_score(m, 2) == 3.5);
  CHECK(image_score(m, 1) == 4.0);
  CHECK(image_score(m, 4) == 2.5);
  CHECK_THROWS_AS(image_score(m, 0), ConfigError);
  CHECK_THROWS_AS(image_score(m, 5), ConfigError);
}

TEST_CASE("image helpers") {
  auto k = image::gaussian_kernel(1.0);
  CHECK(k.size() == 9);
  double s = 0;
  for (double v : k) s += v;
  CHECK(s == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(image::reflect_index(-1, 5) == 1);
  CHECK(image::reflect_index(5, 5) == 3);
  std::vector<double> plane{1, 2, 3, 4};
  CHECK(image::bilinear_resize(plane, 2, 2, 2, 2) == plane);
  CHECK(image::gaussian_blur(plane, 2, 2, 0.0) == plane);
  CHECK(image::sample_bilinear(plane.data(), 2, 2, 0.5, 0.5) == doctest::Approx(2.5));
  CHECK(image::sample_bilinear(plane.data(), 2, 2, -3.0, 9.0) == 2.0);
}
