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
#include <limits>

#include "ckad/error.hpp"
#include "ckad/ops.hpp"
#include "ckad/tensor.hpp"
#include "helpers.hpp"

using namespace ckad;

TEST_CASE("construction validates shape and values") {
  CHECK_THROWS_AS(Tensor(Shape{}), DimensionError);
  CHECK_THROWS_AS(Tensor(Shape{2, 0}), DimensionError);
  CHECK_THROWS_AS(Tensor({3}, std::vector<double>{1, 2}), DimensionError);
  CHECK_THROWS_AS(Tensor({1}, std::vector<double>{std::nan("")}), NumericError);
  CHECK_THROWS_AS(Tensor({1}, std::vector<double>{std::numeric_limits<double>::infinity()}), NumericError);
  Tensor t({2, 3}, 1.5);
  CHECK(t.numel() == 6);
  CHECK(t.at(5) == 1.5);
  CHECK_THROWS_AS(t.dim(2), DimensionError);
  CHECK_THROWS_AS(t.item(), UsageError);
}

TEST_CASE("copies share storage, clone does not") {
  Tensor a({2}, std::vector<double>{1, 2});
  Tensor b = a;
  Tensor c = a.clone();
  a.mutable_data()[0] = 7;
  CHECK(b.at(0) == 7);
  CHECK(c.at(0) == 1);
}

TEST_CASE("sum backward gives ones") {
  Tensor x = testutil::randn({3, 4}, 1, 1.0, true);
  backward(ops::sum(x));
  for (double g : x.grad()) CHECK(g == 1.0);
}

TEST_CASE("two backward calls without zeroing double the grads") {
  Tensor x = testutil::randn({5}, 2, 1.0, true);
  Tensor y = testutil::randn({5}, 3);
  backward(ops::cosine_flat(x, y));
  const auto g1 = x.grad();
  backward(ops::cosine_flat(x, y));
  const auto g2 = x.grad();
  for (std::size_t i = 0; i < g1.size(); ++i) CHECK(g2[i] == 2.0 * g1[i]);
  x.zero_grad();
  for (double g : x.grad()) CHECK(g == 0.0);
}

TEST_CASE("cosine_flat grad matches central differences") {
  Tensor x = testutil::randn({2, 3}, 4, 1.0, true);
  Tensor y = testutil::randn({2, 3}, 5);
  backward(ops::cosine_flat(x, y));
  const auto g = x.grad();
  const double h = 1e-6;
  for (std::size_t i = 0; i < x.numel(); ++i) {
    Tensor xp = x.clone(), xm = x.clone();
    xp.mutable_data()[i] += h;
    xm.mutable_data()[i] -= h;
    const double num = (ops::cosine_flat(xp, y).item() - ops::cosine_flat(xm, y).item()) / (2 * h);
    CHECK(std::abs(g[i] - num) <= 1e-6 * std::max(1.0, std::abs(num)));
  }
}

TEST_CASE("shared subexpressions accumulate") {
  Tensor x = Tensor::scalar(3.0, true);
  Tensor y = ops::mul(x, x);  // x^2
  Tensor z = ops::add(y, ops::mul(y, x));  // x^2 + x^3
  backward(z);
  CHECK(x.grad()[0] == doctest::Approx(2 * 3.0 + 3 * 9.0).epsilon(1e-14));
}

TEST_CASE("backward needs a one-element loss") {
  Tensor x = testutil::randn({3}, 6, 1.0, true);
  CHECK_THROWS_AS(backward(ops::scale(x, 2.0)), UsageError);
  CHECK_THROWS_AS(backward(Tensor()), UsageError);
}

TEST_CASE("no-grad guard and detach cut the graph") {
  Tensor x = testutil::randn({3}, 7, 1.0, true);
  {
    NoGradGuard ng;
    CHECK_FALSE(grad_mode_enabled());
    Tensor y = ops::sum(ops::mul(x, x));
    CHECK_FALSE(y.requires_grad());
  }
  CHECK(grad_mode_enabled());
  Tensor d = x.detach();
  CHECK_FALSE(d.requires_grad());
  CHECK(d.data().data() == x.data().data());
  Tensor loss = ops::add(ops::sum(d), ops::sum(x));
  backward(loss);
  for (double g : x.grad()) CHECK(g == 1.0);
}

TEST_CASE("requires_grad is leaf-only") {
  Tensor x = testutil::randn({2}, 8, 1.0, true);
  Tensor y = ops::scale(x, 2.0);
  CHECK_THROWS_AS(y.set_requires_grad(false), UsageError);
}

TEST_CASE("non-finite results raise at the op boundary") {
  Tensor x({1}, std::vector<double>{1e308});
  CHECK_THROWS_AS(ops::scale(x, 10.0), NumericError);
}
