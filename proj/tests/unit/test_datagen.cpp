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

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "ckad/datagen.hpp"
#include "ckad/error.hpp"
#include "ckad/tensor_file.hpp"
#include "helpers.hpp"

using namespace ckad;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

GenParams small_params() {
  GenParams p;
  p.train_normal = 20;
  p.rl = 0.1;
  p.test_normal = 4;
  p.test_anomalous = 4;
  return p;
}

}  // namespace

TEST_CASE("normal textures are reproducible, bounded and smooth") {
  GenParams p;
  std::mt19937_64 r1(5), r2(5);
  Tensor a = gen_normal(p, r1), b = gen_normal(p, r2);
  CHECK(a.shape() == Shape{3, 64, 64});
  double mean = 0;
  for (std::size_t i = 0; i < a.numel(); ++i) {
    REQUIRE(a.at(i) == b.at(i));
    CHECK(a.at(i) >= 0.0);
    CHECK(a.at(i) <= 1.0);
    mean += a.at(i) / a.numel();
  }
  // Lag-1 autocorrelation along rows of channel 0.
  double num = 0, den = 0, m0 = 0;
  for (std::size_t i = 0; i < 64 * 64; ++i) m0 += a.at(i) / (64 * 64);
  for (std::size_t y = 0; y < 64; ++y)
    for (std::size_t x = 0; x < 64; ++x) {
      const double v = a.at(y * 64 + x) - m0;
      den += v * v;
      if (x + 1 < 64) num += v * (a.at(y * 64 + x + 1) - m0);
    }
  CHECK(num / den > 0.9);
}

TEST_CASE("planted defects respect footprint, size and contrast") {
  GenParams p;
  for (std::uint64_t s = 0; s < 60; ++s) {
    std::mt19937_64 rng(s);
    Tensor base = gen_normal(p, rng);
    DefectSample d = plant_defect(base, p, rng);
    REQUIRE(d.mask.shape() == Shape{64, 64});
    std::size_t area = 0, y0 = 64, y1 = 0, x0 = 64, x1 = 0;
    double inside = 0;
    for (std::size_t y = 0; y < 64; ++y)
      for (std::size_t x = 0; x < 64; ++x) {
        const double m = d.mask.at(y * 64 + x);
        REQUIRE((m == 0.0 || m == 1.0));
        for (std::size_t c = 0; c < 3; ++c) {
          const std::size_t i = (c * 64 + y) * 64 + x;
          if (m == 0.0) REQUIRE(d.image.at(i) == base.at(i));
          else inside += std::abs(d.image.at(i) - base.at(i));
        }
        if (m == 1.0) {
          ++area;
          y0 = std::min(y0, y), y1 = std::max(y1, y), x0 = std::min(x0, x), x1 = std::max(x1, x);
        }
      }
    REQUIRE(area > 0);
    const std::size_t extent = std::max(y1 - y0 + 1, x1 - x0 + 1);
    CHECK(extent + 1 >= p.defect_min);
    CHECK(extent <= p.defect_max + 2);
    CHECK(area <= (p.defect_max + 1) * (p.defect_max + 1));
    CHECK(inside / (3.0 * area) >= 0.5 * p.contrast_min);
  }
}

TEST_CASE("elastic distortion") {
  GenParams p;
  std::mt19937_64 rng(9);
  Tensor img = gen_normal(p, rng);
  Tensor same = elastic_distort(img, 0.0, 3.0, rng);
  for (std::size_t i = 0; i < img.numel(); ++i) REQUIRE(same.at(i) == img.at(i));
  Tensor out = elastic_distort(img, 2.0, 3.0, rng);
  double lo = 1, hi = 0, olo = 1, ohi = 0;
  for (std::size_t i = 0; i < img.numel(); ++i) {
    lo = std::min(lo, img.at(i)), hi = std::max(hi, img.at(i));
    olo = std::min(olo, out.at(i)), ohi = std::max(ohi, out.at(i));
  }
  CHECK(olo >= lo);
  CHECK(ohi <= hi);

  // On coordinate ramps bilinear sampling returns the sampled coordinate,
  // which exposes the displacement field away from the border.
  const std::size_t n = 96;
  Tensor ramp({2, n, n}, 0.0);
  for (std::size_t y = 0; y < n; ++y)
    for (std::size_t x = 0; x < n; ++x) {
      ramp.mutable_data()[y * n + x] = static_cast<double>(y);
      ramp.mutable_data()[n * n + y * n + x] = static_cast<double>(x);
    }
  for (double amp : {1.0, 2.0, 3.0}) {
    Tensor d = elastic_distort(ramp, amp, 3.0, rng);
    double sum = 0, cnt = 0;
    for (std::size_t y = 12; y + 12 < n; ++y)
      for (std::size_t x = 12; x + 12 < n; ++x) {
        sum += std::abs(d.at(y * n + x) - static_cast<double>(y));
        sum += std::abs(d.at(n * n + y * n + x) - static_cast<double>(x));
        cnt += 2;
      }
    const double expected = amp * std::sqrt(2.0 / std::numbers::pi);
    CHECK(sum / cnt == doctest::Approx(expected).epsilon(0.2));
  }
  CHECK_THROWS_AS(elastic_distort(img, -1.0, 3.0, rng), ConfigError);
}

TEST_CASE("parameter parsing and validation") {
  GenParams p;
  CHECK(p.train_anomalous() == 10);
  p.set("defect_kinds", "disk,scratch");
  CHECK(p.kinds == std::vector<DefectKind>{DefectKind::kDisk, DefectKind::kScratch});
  p.set("train_anomalies", "elastic");
  CHECK(p.train_anomalies == TrainAnomalyKind::kElastic);
  CHECK_THROWS_AS(p.set("colour", "red"), ConfigError);
  CHECK_THROWS_AS(p.set("defect_kinds", "blob"), ConfigError);
  CHECK_THROWS_AS(p.set("rl", "abc"), ConfigError);
  GenParams big;
  big.defect_max = 16;  // must stay below image_size / 4
  CHECK_THROWS_AS(big.validate(), ConfigError);
  big.defect_max = 15;
  CHECK_NOTHROW(big.validate());
  const auto dir = testutil::temp_dir("gen");
  std::ofstream(dir / "g.txt") << "# comment\nseed = 4\ncontrast_min = 0.05\n";
  GenParams l = GenParams::load(dir / "g.txt");
  CHECK(l.seed == 4);
  CHECK(l.contrast_min == 0.05);
  std::filesystem::remove_all(dir);
}

TEST_CASE("dataset files, invariants and reproducibility") {
  const auto d1 = testutil::temp_dir("gen"), d2 = testutil::temp_dir("gen");
  GenParams p = small_params();
  DatasetManifest m = gen_dataset(p, d1);
  gen_dataset(p, d2);
  CHECK(m.select(Split::kTrain, Label::kNormal).size() == 20);
  CHECK(m.select(Split::kTrain, Label::kAnomalous).size() == 2);
  CHECK(m.select(Split::kTest, Label::kAnomalous).size() == 4);
  auto loaded = DatasetManifest::load(d1 / "manifest.tsv");
  CHECK_NOTHROW(loaded.validate());
  for (const auto& e : loaded.entries) {
    if (e.split == Split::kTrain) CHECK_FALSE(e.mask.has_value());
    if (e.split == Split::kTest) CHECK(e.mask.has_value() == (e.label == Label::kAnomalous));
    CHECK(slurp(d1 / e.image) == slurp(d2 / e.image));
    if (e.mask) {
      Tensor mk = load_tensor(d1 / *e.mask);
      CHECK(mk.shape() == Shape{64, 64});
    }
  }
  CHECK(slurp(d1 / "manifest.tsv") == slurp(d2 / "manifest.tsv"));
  std::filesystem::remove_all(d1);
  std::filesystem::remove_all(d2);
}
