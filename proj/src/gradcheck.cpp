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

#include "ckad/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

#include "ckad/autoencoder.hpp"
#include "ckad/discriminator.hpp"
#include "ckad/losses.hpp"
#include "ckad/ops.hpp"
#include "ckad/rng.hpp"

namespace ckad::gradcheck {
namespace {

Tensor random_tensor(Shape shape, std::mt19937_64& rng, bool away_from_zero = false) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(shape_numel(shape));
  for (auto& x : v) {
    x = u(rng);
    // Keeps probes of kinked ops off the kink.
    if (away_from_zero) x = std::copysign(0.1 + 0.9 * std::abs(x), x);
  }
  return Tensor(std::move(shape), std::move(v), true);
}

// sum(op(x) * w) turns any op into a scalar with a generic upstream grad.
Tensor weighted_sum(const Tensor& y, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> w(y.numel());
  for (auto& v : w) v = u(rng);
  return ops::sum(ops::mul(y, Tensor(y.shape(), std::move(w))));
}

FeatureBatch random_features(const std::vector<Shape>& shapes, std::size_t n, std::mt19937_64& rng) {
  FeatureBatch b;
  std::normal_distribution<double> nd(0.0, 1.0);
  for (const auto& s : shapes) {
    Shape full{n, s[0], s[1], s[2]};
    std::vector<double> v(shape_numel(full));
    for (auto& x : v) x = std::abs(nd(rng));  // post-ReLU-like
    b.maps.push_back(Tensor(full, std::move(v)));
  }
  return b;
}

std::vector<Tensor> param_tensors(const ParamStore& p) {
  std::vector<Tensor> out;
  for (const auto& [name, t] : p.entries()) out.push_back(t);
  return out;
}

}  // namespace

double rel_error(double analytic, double numeric) {
  const double den = std::max({std::abs(analytic), std::abs(numeric), kFloor});
  return std::abs(analytic - numeric) / den;
}

Result check(const std::string& name, const std::function<Tensor()>& f, std::vector<Tensor> wrt,
             std::size_t probes, std::uint64_t seed) {
  for (auto& t : wrt) t.zero_grad();
  backward(f());
  std::vector<std::size_t> offsets{0};
  for (const auto& t : wrt) offsets.push_back(offsets.back() + t.numel());
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, offsets.back() - 1);
  Result r{name, 0, 0.0};
  NoGradGuard ng;
  for (std::size_t p = 0; p < probes; ++p) {
    const std::size_t flat = pick(rng);
    const std::size_t ti = static_cast<std::size_t>(std::upper_bound(offsets.begin(), offsets.end(), flat) -
                                                    offsets.begin()) - 1;
    const std::size_t idx = flat - offsets[ti];
    Tensor& t = wrt[ti];
    const double analytic = t.grad()[idx];
    double& x = t.mutable_data()[idx];
    const double orig = x;
    x = orig + kStep;
    const double up = f().item();
    x = orig - kStep;
    const double down = f().item();
    x = orig;
    const double numeric = (up - down) / (2.0 * kStep);
    r.max_rel_err = std::max(r.max_rel_err, rel_error(analytic, numeric));
    ++r.probes;
  }
  for (auto& t : wrt) t.zero_grad();
  return r;
}

std::vector<Result> check_ops(std::size_t probes, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Result> out;
  std::uint64_t k = 0;
  auto run = [&](const std::string& name, std::vector<Tensor> xs, std::function<Tensor(const std::vector<Tensor>&)> op,
                 bool scalar_out = false) {
    const std::uint64_t wseed = derive_seed(seed, name);
    auto f = [=]() {
      Tensor y = op(xs);
      return scalar_out ? y : weighted_sum(y, wseed);
    };
    out.push_back(check(name, f, xs, probes, derive_seed(seed, "probe", ++k)));
  };
  const Shape s{2, 3, 4, 4};
  run("add", {random_tensor(s, rng), random_tensor(s, rng)}, [](auto& x) { return ops::add(x[0], x[1]); });
  run("sub", {random_tensor(s, rng), random_tensor(s, rng)}, [](auto& x) { return ops::sub(x[0], x[1]); });
  run("mul", {random_tensor(s, rng), random_tensor(s, rng)}, [](auto& x) { return ops::mul(x[0], x[1]); });
  run("scale", {random_tensor(s, rng)}, [](auto& x) { return ops::scale(x[0], -1.7); });
  run("add_scalar", {random_tensor(s, rng)}, [](auto& x) { return ops::add_scalar(x[0], 0.3); });
  run("neg", {random_tensor(s, rng)}, [](auto& x) { return ops::neg(x[0]); });
  run("relu", {random_tensor(s, rng, true)}, [](auto& x) { return ops::relu(x[0]); });
  run("leaky_relu", {random_tensor(s, rng, true)}, [](auto& x) { return ops::leaky_relu(x[0], 0.2); });
  run("softplus", {random_tensor(s, rng)}, [](auto& x) { return ops::softplus(ops::scale(x[0], 5.0)); });
  run("max_elemwise", {random_tensor(s, rng, true)}, [](auto& x) { return ops::max_elemwise(x[0], 0.0); });
  run("sum", {random_tensor(s, rng)}, [](auto& x) { return ops::sum(x[0]); }, true);
  run("mean", {random_tensor(s, rng)}, [](auto& x) { return ops::mean(x[0]); }, true);
  run("reshape", {random_tensor(s, rng)}, [](auto& x) { return ops::reshape(x[0], {2, 48}); });
  run("concat_channels", {random_tensor(s, rng), random_tensor({2, 2, 4, 4}, rng)},
      [](auto& x) { return ops::concat_channels({x[0], x[1]}); });
  run("concat_batch", {random_tensor(s, rng), random_tensor({1, 3, 4, 4}, rng)},
      [](auto& x) { return ops::concat_batch({x[0], x[1]}); });
  run("slice_batch", {random_tensor({3, 3, 4, 4}, rng)}, [](auto& x) { return ops::slice_batch(x[0], 1, 3); });
  run("upsample_nearest2x", {random_tensor(s, rng)}, [](auto& x) { return ops::upsample_nearest2x(x[0]); });
  run("global_avg_pool", {random_tensor(s, rng)}, [](auto& x) { return ops::global_avg_pool(x[0]); });
  run("conv2d", {random_tensor({2, 2, 5, 5}, rng), random_tensor({3, 2, 3, 3}, rng), random_tensor({3}, rng)},
      [](auto& x) { return ops::conv2d(x[0], x[1], x[2], {2, 1}); });
  run("conv2d_1x1", {random_tensor(s, rng), random_tensor({2, 3, 1, 1}, rng), random_tensor({2}, rng)},
      [](auto& x) { return ops::conv2d(x[0], x[1], x[2]); });
  run("conv_transpose2d",
      {random_tensor({2, 3, 3, 3}, rng), random_tensor({3, 2, 2, 2}, rng), random_tensor({2}, rng)},
      [](auto& x) { return ops::conv_transpose2d(x[0], x[1], x[2], 2); });
  run("instance_norm", {random_tensor(s, rng), random_tensor({3}, rng), random_tensor({3}, rng)},
      [](auto& x) { return ops::instance_norm(x[0], x[1], x[2]); });
  run("cosine_rows", {random_tensor(s, rng), random_tensor(s, rng)},
      [](auto& x) { return ops::cosine_rows(x[0], x[1]); });
  run("cosine_flat", {random_tensor(s, rng), random_tensor(s, rng)},
      [](auto& x) { return ops::cosine_flat(x[0], x[1]); }, true);
  return out;
}

std::vector<Result> check_losses(std::size_t probes, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const std::vector<Shape> shapes{{4, 8, 8}, {6, 4, 4}};
  AutoEncoder ae(shapes, derive_seed(seed, "ae"));
  Discriminator d(shapes, derive_seed(seed, "disc"));
  Batch batch;
  batch.normal = random_features(shapes, 2, rng);
  batch.anomalous = random_features(shapes, 2, rng);
  LossConstants c;
  const auto ae_params = param_tensors(ae.params());
  const auto d_params = param_tensors(d.params());

  std::vector<Result> out;
  std::uint64_t k = 0;
  auto run = [&](const std::string& name, std::function<Tensor()> f, const std::vector<Tensor>& wrt) {
    out.push_back(check(name, f, wrt, probes, derive_seed(seed, "loss-probe", ++k)));
  };
  run("recon_plus", [&] { return loss_recon_plus(batch, generate(ae, batch)); }, ae_params);
  run("recon_sub", [&] { return loss_recon_sub(batch, generate(ae, batch), 0.5); }, ae_params);
  // The discriminator side is checked with a fixed generator output.
  const Generated fixed = [&] {
    NoGradGuard ng;
    return generate(ae, batch);
  }();
  run("gan_disc", [&] { return loss_gan_disc(d, batch, fixed); }, d_params);
  run("gan_gen", [&] { return loss_gan_gen(d, generate(ae, batch)); }, ae_params);
  run("disc_image", [&] { return loss_disc_image(d, batch, fixed, c); }, d_params);
  run("gen_image", [&] { return loss_gen_image(d, batch, generate(ae, batch), c); }, ae_params);
  run("disc_patch", [&] { return loss_disc_patch(d, batch, fixed, c); }, d_params);
  run("gen_patch", [&] { return loss_gen_patch(d, batch, generate(ae, batch), c); }, ae_params);
  return out;
}

std::string report(const std::vector<Result>& results) {
  std::ostringstream os;
  double worst = 0.0;
  for (const auto& r : results) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s %-20s probes=%zu max_rel_err=%.3e\n", r.pass() ? "PASS" : "FAIL",
                  r.name.c_str(), r.probes, r.max_rel_err);
    os << buf;
    worst = std::max(worst, r.max_rel_err);
  }
  char buf[96];
  std::snprintf(buf, sizeof buf, "max_rel_err %.3e (tolerance %.0e)\n", worst, kTolerance);
  os << buf;
  return os.str();
}

bool all_pass(const std::vector<Result>& results) {
  return std::all_of(results.begin(), results.end(), [](const Result& r) { return r.pass(); });
}

}  // namespace ckad::gradcheck
