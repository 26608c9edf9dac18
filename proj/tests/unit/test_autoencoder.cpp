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

#include "ckad/autoencoder.hpp"
#include "ckad/error.hpp"
#include "ckad/losses.hpp"
#include "ckad/ops.hpp"
#include "helpers.hpp"

using namespace ckad;

namespace {
const std::vector<Shape> kShapes{{32, 16, 16}, {64, 8, 8}};
}

TEST_CASE("latent has the bottleneck shape") {
  AutoEncoder ae(kShapes, 1);
  CHECK(ae.latent_shape() == Shape{96, 4, 4});
  Tensor z = ae.encode(testutil::random_batch(kShapes, 2, 3));
  CHECK(z.shape() == Shape{2, 96, 4, 4});
}

TEST_CASE("decode matches the input shapes and stays finite on zero latent") {
  AutoEncoder ae(kShapes, 1);
  FeatureBatch out = ae.decode(Tensor({1, 96, 4, 4}, 0.0));
  REQUIRE(out.maps.size() == 2);
  CHECK(out.maps[0].shape() == Shape{1, 32, 16, 16});
  CHECK(out.maps[1].shape() == Shape{1, 64, 8, 8});
  for (const auto& m : out.maps)
    for (double v : m.data()) REQUIRE(std::isfinite(v));
}

TEST_CASE("encoder is non-degenerate and deterministic") {
  AutoEncoder a(kShapes, 5), b(kShapes, 5);
  FeatureBatch x = testutil::random_batch(kShapes, 1, 9);
  Tensor za = a.encode(x), zb = b.encode(x);
  for (std::size_t i = 0; i < za.numel(); ++i) REQUIRE(za.at(i) == zb.at(i));
  FeatureBatch x2;
  for (const auto& m : x.maps) x2.maps.push_back(ops::scale(m, 2.0));
  Tensor z2 = a.encode(x2);
  double diff = 0.0;
  for (std::size_t i = 0; i < za.numel(); ++i) diff += std::abs(z2.at(i) - za.at(i));
  CHECK(diff > 1e-6);
}

TEST_CASE("every parameter gets gradient from one output element") {
  AutoEncoder ae(kShapes, 2);
  FeatureBatch y = ae.reconstruct(testutil::random_batch(kShapes, 1, 4));
  backward(ops::sum(ops::slice_batch(ops::reshape(y.maps[1], {y.maps[1].numel()}), 0, 1)));
  std::size_t reached = 0, encoder = 0;
  for (const auto& [name, t] : ae.params().entries()) {
    double g = 0.0;
    for (double v : t.grad()) g += v * v;
    if (name.rfind("enc", 0) == 0) {
      ++encoder;
      CHECK_MESSAGE(g > 0.0, name);
    }
    reached += g > 0.0;
  }
  CHECK(encoder > 0);
  CHECK(reached > 0);
}

TEST_CASE("untrained reconstruction is near-orthogonal") {
  AutoEncoder ae(kShapes, 3);
  Batch b;
  b.normal = testutil::random_batch(kShapes, 4, 5);
  const double l = loss_recon_plus(b, generate(ae, b)).item();
  // Sum over two scales of (1 - cos), cos ~ 0.
  CHECK(l == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("input validation") {
  CHECK_THROWS(AutoEncoder({{32, 16, 16}, {64, 7, 7}}, 1));
  AutoEncoder ae(kShapes, 1);
  CHECK_THROWS_AS(ae.encode(testutil::random_batch({{32, 16, 16}, {64, 4, 4}}, 1, 1)), DimensionError);
}
