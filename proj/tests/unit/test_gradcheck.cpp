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

#include "ckad/gradcheck.hpp"
#include "ckad/ops.hpp"
#include "helpers.hpp"

using namespace ckad;
using namespace ckad::gradcheck;

TEST_CASE("relative error uses the floor for tiny gradients") {
  CHECK(rel_error(1.0, 1.0) == 0.0);
  CHECK(rel_error(2.0, 1.0) == doctest::Approx(0.5));
  CHECK(rel_error(1e-9, 0.0) == doctest::Approx(1e-9 / kFloor));
}

TEST_CASE("a wrong gradient is caught") {
  Tensor x = testutil::randn({6}, 1, 1.0, true);
  // d/dx sum(x * stopgrad(x)) is x analytically but 2x numerically.
  Result r = check("bogus", [&] { return ops::sum(ops::mul(x, x.detach())); }, {x}, 20, 2);
  CHECK_FALSE(r.pass());
  Result ok = check("square", [&] { return ops::sum(ops::mul(x, x)); }, {x}, 20, 2);
  CHECK(ok.pass());
  CHECK(ok.probes == 20);
}

TEST_CASE("every op and loss passes") {
  auto ops_r = check_ops(kDefaultProbes, 5);
  auto loss_r = check_losses(kDefaultProbes, 5);
  CHECK(ops_r.size() >= 20);
  CHECK(loss_r.size() == 8);
  for (const auto& r : ops_r) CHECK_MESSAGE(r.pass(), r.name, " ", r.max_rel_err);
  for (const auto& r : loss_r) CHECK_MESSAGE(r.pass(), r.name, " ", r.max_rel_err);
  CHECK(all_pass(ops_r));
  CHECK(report(loss_r).find("FAIL") == std::string::npos);
}
