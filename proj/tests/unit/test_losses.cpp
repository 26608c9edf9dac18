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

#include "ckad/error.hpp"
#include "ckad/losses.hpp"
#include "ckad/ops.hpp"
#include "helpers.hpp"

using namespace ckad;
using testutil::randn;

namespace {

const std::vector<Shape> kShapes{{4, 8, 8}, {6, 4, 4}};

// Sets one MLP head to the constant pre-softplus logit `logit`.
void constant_head(Discriminator& d, const std::string& prefix, double logit) {
  for (auto& [name, t] : d.params().entries()) {
    if (name.rfind(prefix, 0) != 0) continue;
    if (name.find(".fc2.weight") != std::string::npos)
      for (auto& v : t.mutable_data()) v = 0.0;
    if (name.find(".fc2.bias") != std::string::npos) t.mutable_data()[0] = logit;
  }
}

double inv_softplus(double e) { return std::log(std::expm1(e)); }

Batch make_batch(std::size_t nn, std::size_t na, std::uint64_t seed,
                 const std::vector<Shape>& shapes = kShapes) {
  Batch b;
  b.normal = testutil::random_batch(shapes, nn, derive_seed(seed, "n"));
  if (na) b.anomalous = testutil::random_batch(shapes, na, derive_seed(seed, "a"));
  return b;
}

Generated manual_gen(const FeatureBatch& normal_part, const FeatureBatch& anomalous_part) {
  Generated g;
  g.normal_part = normal_part;
  g.anomalous_part = anomalous_part;
  g.all = anomalous_part.maps.empty() ? normal_part : concat_batches(normal_part, anomalous_part);
  return g;
}

FeatureBatch scaled(const FeatureBatch& b, double s) {
  FeatureBatch o;
  for (const auto& m : b.maps) o.maps.push_back(ops::scale(m, s));
  return o;
}

// Rotates each sample's flattened vectors so they become orthogonal: pairs
// (x0, x1) -> (-x1, x0).
FeatureBatch orthogonal(const FeatureBatch& b) {
  FeatureBatch o;
  for (const auto& m : b.maps) {
    Tensor t = m.clone();
    auto d = t.mutable_data();
    for (std::size_t i = 0; i + 1 < d.size(); i += 2) {
      const double x0 = d[i], x1 = d[i + 1];
      d[i] = -x1;
      d[i + 1] = x0;
    }
    o.maps.push_back(t);
  }
  return o;
}

double grad_norm(const ParamStore& ps) { return ps.grad_sq_norm(); }

bool all_grads_zero(const ParamStore& ps) {
  for (const auto& [name, t] : ps.entries())
    for (double v : t.grad())
      if (v != 0.0) return false;
  return true;
}

}  // namespace

TEST_CASE("recon_plus examples") {
  Batch b = make_batch(3, 0, 1);
  CHECK(std::abs(loss_recon_plus(b, manual_gen(b.normal, {})).item()) < 1e-14);
  CHECK(loss_recon_plus(b, manual_gen(orthogonal(b.normal), {})).item() == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(loss_recon_plus(b, manual_gen(scaled(b.normal, -1.0), {})).item() == doctest::Approx(4.0).epsilon(1e-14));
}

TEST_CASE("recon_sub examples") {
  // One scale: cos 0.5 on normals (L+ = 0.5); orthogonal on anomalies (L- = 1).
  const std::vector<Shape> one{{2, 1, 1}};
  Batch b;
  b.normal.maps = {Tensor({1, 2, 1, 1}, std::vector<double>{1.0, 0.0})};
  b.anomalous.maps = {Tensor({1, 2, 1, 1}, std::vector<double>{0.0, 1.0})};
  FeatureBatch rn, ra;
  rn.maps = {Tensor({1, 2, 1, 1}, std::vector<double>{0.5, std::sqrt(3.0) / 2})};
  ra.maps = {Tensor({1, 2, 1, 1}, std::vector<double>{1.0, 0.0})};
  Generated g = manual_gen(rn, ra);
  CHECK(loss_recon_sub(b, g, 0.02).item() == doctest::Approx(0.48).epsilon(1e-14));
  CHECK(loss_recon_sub(b, g, 0.0).item() == loss_recon_plus(b, g).item());
  // Unbounded below as the anomalous error grows with lambda.
  CHECK(loss_recon_sub(b, g, 100.0).item() < 0.0);
  CHECK_THROWS_AS(loss_recon_sub(make_batch(1, 0, 2), manual_gen(make_batch(1, 0, 2).normal, {}), 0.1),
                  ConfigError);
}

TEST_CASE("gan pair with zero logits") {
  Discriminator d(kShapes, 1);
  constant_head(d, "image", 0.0);
  Batch b = make_batch(2, 2, 3);
  Generated g = manual_gen(b.normal, b.anomalous);
  GanLosses l = loss_gan_pair(d, b, g);
  CHECK(l.d_loss.item() == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-14));
  CHECK(l.g_adv.item() == doctest::Approx(std::log(2.0)).epsilon(1e-14));
  constant_head(d, "image", 1.5);
  CHECK(loss_gan_gen(d, g).item() < l.g_adv.item());
}

TEST_CASE("hinge and energy building blocks") {
  LossConstants c;
  c.a = 2.0;
  c.gamma = 0.3;
  auto full = [](double v) { return Tensor({4}, v); };
  CHECK(disc_hinge_loss(full(0.0), full(2.0), full(2.0), c).item() == 0.0);
  CHECK(disc_hinge_loss(full(0.0), full(0.0), full(0.0), c).item() == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(disc_hinge_loss(full(2.0), full(2.0), full(2.0), c).item() == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(std::abs(gen_energy_loss(full(0.7), full(0.7), full(0.7), c).item()) < 1e-15);
  LossConstants g1 = c;
  g1.gamma = 1.0;
  Tensor en = randn({5}, 1), eg = randn({5}, 2);
  CHECK(gen_energy_loss(en, eg, std::nullopt, g1).item() ==
        doctest::Approx(ops::mean(eg).item() - ops::mean(en).item()).epsilon(1e-14));
  CHECK(gen_energy_loss(full(0.5), full(0.2), full(0.5), c).item() <
        gen_energy_loss(full(0.5), full(0.4), full(0.5), c).item());
  CHECK_THROWS_AS(disc_hinge_loss(full(0.0), full(0.0), std::nullopt, c), ConfigError);
}

TEST_CASE("discriminator image loss is non-negative") {
  LossConstants c;
  for (std::uint64_t s = 0; s < 10; ++s) {
    Discriminator d(kShapes, s);
    Batch b = make_batch(2, 2, s + 10);
    AutoEncoder ae(kShapes, s);
    Generated g = generate(ae, b);
    CHECK(loss_disc_image(d, b, g, c).item() >= 0.0);
    CHECK(loss_disc_patch(d, b, g, c).item() >= 0.0);
  }
}

TEST_CASE("constant discriminators give the closed-form values") {
  Discriminator d(kShapes, 4);
  LossConstants c;
  c.a = 1.0;
  Batch b = make_batch(2, 2, 5);
  Generated g = manual_gen(scaled(b.normal, 0.5), scaled(b.anomalous, 2.0));
  const double e = 0.4;
  constant_head(d, "image", inv_softplus(e));
  for (std::size_t s = 0; s < 2; ++s) constant_head(d, "patch.map" + std::to_string(s), inv_softplus(e));
  CHECK(std::abs(loss_gen_image(d, b, g, c).item()) < 1e-14);
  CHECK(std::abs(loss_gen_patch(d, b, g, c).item()) < 1e-14);
  // e + gamma (a - e) + (1 - gamma)(a - e) = a per term.
  CHECK(loss_disc_image(d, b, g, c).item() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(loss_disc_patch(d, b, g, c).item() == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("patch losses match a hand-rolled loop") {
  Discriminator d(kShapes, 6);
  LossConstants c{0.5, 0.3, 0.02, 1.2};
  Batch b = make_batch(3, 2, 7);
  AutoEncoder ae(kShapes, 6);
  Generated g = generate(ae, b);
  double ld = 0.0, lg = 0.0;
  for (std::size_t s = 0; s < 2; ++s) {
    auto e = [&](const Tensor& f) { return d.energy_map(s, f, ParamMode::kTrainable); };
    Tensor en = e(b.normal.maps[s]), eg = e(g.all.maps[s]), ea = e(b.anomalous.maps[s]);
    double mn = 0, hg = 0, ha = 0, mg = 0, ma = 0;
    for (double v : en.data()) mn += v / en.numel();
    for (double v : eg.data()) {
      hg += std::max(0.0, c.a - v) / eg.numel();
      mg += v / eg.numel();
    }
    for (double v : ea.data()) {
      ha += std::max(0.0, c.a - v) / ea.numel();
      ma += v / ea.numel();
    }
    ld += mn + c.gamma * hg + (1 - c.gamma) * ha;
    lg += c.gamma * mg + (1 - c.gamma) * ma - mn;
  }
  CHECK(loss_disc_patch(d, b, g, c).item() == doctest::Approx(ld).epsilon(1e-13));
  CHECK(loss_gen_patch(d, b, g, c).item() == doctest::Approx(lg).epsilon(1e-13));
}

TEST_CASE("single-position patch losses equal image losses") {
  const std::vector<Shape> one{{5, 1, 1}};
  Discriminator d(one, 8);
  // Share the weights between the patch and image heads.
  for (auto& [name, t] : d.params().entries())
    if (name.rfind("image.", 0) == 0) {
      const Tensor& src = d.params().get("patch.map0." + name.substr(6));
      std::copy(src.data().begin(), src.data().end(), t.mutable_data().begin());
    }
  LossConstants c{0.5, 0.5, 0.02, 1.0};
  for (std::uint64_t s = 0; s < 5; ++s) {
    Batch b = make_batch(3, 3, 20 + s, one);
    Generated g = manual_gen(testutil::random_batch(one, 3, 40 + s), testutil::random_batch(one, 3, 60 + s));
    CHECK(std::abs(loss_disc_patch(d, b, g, c).item() - loss_disc_image(d, b, g, c).item()) <= 1e-12);
    CHECK(std::abs(loss_gen_patch(d, b, g, c).item() - loss_gen_image(d, b, g, c).item()) <= 1e-12);
  }
}

TEST_CASE("gamma = 1 removes the anomalous terms") {
  Discriminator d(kShapes, 3);
  AutoEncoder ae(kShapes, 3);
  LossConstants c{0.5, 1.0, 0.02, 1.0};
  Batch with = make_batch(2, 2, 9);
  Generated g = generate(ae, with);
  Batch without;
  without.normal = with.normal;
  // Same generated batch, no anomalous real features at all.
  CHECK(loss_disc_image(d, without, g, c).item() == loss_disc_image(d, with, g, c).item());
  CHECK(loss_gen_image(d, without, g, c).item() == loss_gen_image(d, with, g, c).item());
  CHECK(loss_disc_patch(d, without, g, c).item() == loss_disc_patch(d, with, g, c).item());
  CHECK(loss_gen_patch(d, without, g, c).item() == loss_gen_patch(d, with, g, c).item());
  LossConstants half = c;
  half.gamma = 0.5;
  CHECK_THROWS_AS(loss_disc_patch(d, without, g, half), ConfigError);
}

TEST_CASE("strategy objectives") {
  LossConstants c;
  Discriminator d(kShapes, 2);
  AutoEncoder ae(kShapes, 2);
  Batch b = make_batch(2, 2, 11);
  const Generated g = generate(ae, b);
  for (Strategy s : {Strategy::kRecon, Strategy::kReconSub, Strategy::kGan, Strategy::kCkaImg, Strategy::kCkaPatch}) {
    Objectives o = total_objectives(s, ae, d, b, c);
    CHECK(std::isfinite(o.g_loss.item()));
    CHECK(o.d_loss.has_value() == has_discriminator(s));
    CHECK(parse_strategy(to_string(s)) == s);
  }
  CHECK(std::abs(gen_objective(Strategy::kRecon, d, b, manual_gen(b.normal, b.anomalous), c).item()) < 1e-14);
  LossConstants zero = c;
  zero.lambda = 0.0;
  const double recon = gen_objective(Strategy::kRecon, d, b, g, zero).item();
  for (Strategy s : {Strategy::kReconSub, Strategy::kGan, Strategy::kCkaImg, Strategy::kCkaPatch})
    CHECK(gen_objective(s, d, b, g, zero).item() == recon);
  CHECK(parse_strategy("ckapatch") == Strategy::kCkaPatch);
  CHECK_THROWS_AS(parse_strategy("nope"), ConfigError);
  CHECK_THROWS_AS(total_objectives(Strategy::kCkaPatch, ae, d, make_batch(2, 0, 1), c), ConfigError);
  LossConstants bad = c;
  bad.gamma = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("stop-gradient: D-step leaves AE grads at zero, G-step leaves D grads at zero") {
  LossConstants c;
  for (Strategy s : {Strategy::kGan, Strategy::kCkaImg, Strategy::kCkaPatch}) {
    Discriminator d(kShapes, 5);
    AutoEncoder ae(kShapes, 5);
    Batch b = make_batch(2, 2, 13);
    Generated g = generate(ae, b);
    auto dl = disc_objective(s, d, b, g, c);
    REQUIRE(dl);
    backward(*dl);
    CHECK(all_grads_zero(ae.params()));
    CHECK(grad_norm(d.params()) > 0.0);

    d.params().zero_grad();
    Generated g2 = generate(ae, b);
    LossConstants big = c;
    big.lambda = 1.0;
    Tensor adv = s == Strategy::kGan ? loss_gan_gen(d, g2)
                 : s == Strategy::kCkaImg ? loss_gen_image(d, b, g2, big)
                                          : loss_gen_patch(d, b, g2, big);
    backward(adv);
    CHECK(all_grads_zero(d.params()));
    CHECK(grad_norm(ae.params()) > 0.0);
  }
}
