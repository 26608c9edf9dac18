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

#include "ckad/toy_game.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "ckad/adam.hpp"
#include "ckad/ops.hpp"
#include "ckad/params.hpp"
#include "ckad/rng.hpp"
#include "ckad/theory.hpp"

namespace ckad::toy {
namespace {

// Points as [N, 2, 1, 1] so 1x1 convolutions act as dense layers.
class Mlp {
 public:
  Mlp(std::vector<std::size_t> widths, std::uint64_t seed, bool residual)
      : widths_(std::move(widths)), residual_(residual) {
    for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
      const std::string n = "fc" + std::to_string(l);
      Tensor w = he_normal({widths_[l + 1], widths_[l], 1, 1}, widths_[l], derive_seed(seed, n));
      // Residual generators start at the identity map.
      if (residual_ && l + 2 == widths_.size())
        for (auto& v : w.mutable_data()) v *= 0.01;
      params_.add(n + ".weight", w);
      params_.add(n + ".bias", Tensor({widths_[l + 1]}, 0.0));
    }
  }

  Tensor forward(const Tensor& x, bool frozen) const {
    auto p = [&](const std::string& n) { return frozen ? params_.get(n).detach() : params_.get(n); };
    Tensor h = x;
    for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
      const std::string n = "fc" + std::to_string(l);
      h = ops::conv2d(h, p(n + ".weight"), p(n + ".bias"));
      if (l + 2 < widths_.size()) h = ops::leaky_relu(h, 0.2);
    }
    return residual_ ? ops::add(x, h) : h;
  }

  ParamStore& params() { return params_; }

 private:
  std::vector<std::size_t> widths_;
  bool residual_;
  ParamStore params_;
};

Tensor sample_blob(std::mt19937_64& rng, std::size_t n, double cx, double std) {
  std::normal_distribution<double> nd(0.0, std);
  std::vector<double> v(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    v[2 * i] = cx + nd(rng);
    v[2 * i + 1] = nd(rng);
  }
  return Tensor({n, 2, 1, 1}, std::move(v));
}

std::vector<double> points(const Tensor& t) { return {t.data().begin(), t.data().end()}; }

}  // namespace

bool ToyResult::thresholds_met() const {
  return tv_to_normal < kToyTvMax && tv_to_normal < tv_to_anomalous - kToyMargin;
}

std::vector<double> histogram2d(const std::vector<double>& pts, const ToyConfig& cfg) {
  const std::size_t b = cfg.grid_bins;
  std::vector<double> h(b * b, 0.0);
  const double width = (cfg.grid_hi - cfg.grid_lo) / static_cast<double>(b);
  auto bin = [&](double v) {
    const double f = std::floor((v - cfg.grid_lo) / width);
    return static_cast<std::size_t>(std::clamp(f, 0.0, static_cast<double>(b - 1)));
  };
  const std::size_t n = pts.size() / 2;
  for (std::size_t i = 0; i < n; ++i) h[bin(pts[2 * i]) * b + bin(pts[2 * i + 1])] += 1.0;
  for (auto& v : h) v /= static_cast<double>(n);
  return h;
}

ToyResult train_toy_game(const ToyConfig& cfg) {
  cfg.constants.validate();
  const std::size_t hdim = cfg.hidden;
  Mlp g({2, hdim, hdim, 2}, derive_seed(cfg.seed, "toy-g"), true);
  Mlp d({2, hdim, hdim, 1}, derive_seed(cfg.seed, "toy-d"), false);
  Adam opt_g(g.params(), {cfg.lr_g, 0.5, 0.999, 1e-8});
  Adam opt_d(d.params(), {cfg.lr_d, 0.5, 0.999, 1e-8});
  std::mt19937_64 rng(derive_seed(cfg.seed, "toy-data"));
  const auto& c = cfg.constants;
  const auto n_pos = static_cast<std::size_t>(std::ceil(c.alpha * static_cast<double>(2 * cfg.batch) - 1e-9));
  const std::size_t n_neg = 2 * cfg.batch - n_pos;

  ToyResult res;
  for (std::size_t step = 0; step < cfg.steps; ++step) {
    const Tensor xp = sample_blob(rng, n_pos, cfg.normal_x, cfg.blob_std);
    const Tensor xn = sample_blob(rng, n_neg, cfg.anomaly_x, cfg.blob_std);
    const Tensor gen = g.forward(ops::concat_batch({xp, xn}), false);

    auto energy = [&](const Tensor& x, bool frozen) { return ops::softplus(d.forward(x, frozen)); };
    const Tensor d_loss = disc_hinge_loss(energy(xp, false), energy(gen.detach(), false), energy(xn, false), c);
    d.params().zero_grad();
    backward(d_loss);
    opt_d.step();
    res.d_losses.push_back(d_loss.item());

    const Tensor adv = gen_energy_loss(energy(xp, true), energy(gen, true), energy(xn, true), c);
    const Tensor diff = ops::sub(ops::slice_batch(gen, 0, n_pos), xp);
    const Tensor recon = ops::scale(ops::mean(ops::mul(diff, diff)), 2.0);
    const Tensor g_loss = ops::add(ops::scale(recon, cfg.recon_weight), ops::scale(adv, c.lambda));
    g.params().zero_grad();
    backward(g_loss);
    opt_g.step();
  }

  std::mt19937_64 eval_rng(derive_seed(cfg.seed, "toy-eval"));
  const auto m_pos = static_cast<std::size_t>(std::llround(c.alpha * static_cast<double>(cfg.eval_samples)));
  NoGradGuard ng;
  const Tensor ep = sample_blob(eval_rng, m_pos, cfg.normal_x, cfg.blob_std);
  const Tensor en = sample_blob(eval_rng, cfg.eval_samples - m_pos, cfg.anomaly_x, cfg.blob_std);
  const Tensor gen = g.forward(ops::concat_batch({ep, en}), false);
  const Tensor ref_pos = sample_blob(eval_rng, cfg.eval_samples, cfg.normal_x, cfg.blob_std);
  const Tensor ref_neg = sample_blob(eval_rng, cfg.eval_samples, cfg.anomaly_x, cfg.blob_std);
  res.generated_hist = histogram2d(points(gen), cfg);
  res.normal_hist = histogram2d(points(ref_pos), cfg);
  res.anomalous_hist = histogram2d(points(ref_neg), cfg);
  res.tv_to_normal = theory::tv_l1(res.generated_hist, res.normal_hist);
  res.tv_to_anomalous = theory::tv_l1(res.generated_hist, res.anomalous_hist);
  return res;
}

}  // namespace ckad::toy
