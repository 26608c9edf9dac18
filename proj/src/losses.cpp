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

#include "ckad/losses.hpp"

#include <algorithm>
#include <cctype>
#include <functional>

#include "ckad/error.hpp"
#include "ckad/ops.hpp"

namespace ckad {
namespace {

void require_anomalies(const Batch& batch, const char* what) {
  if (!batch.has_anomalies()) throw ConfigError(std::string(what) + " needs anomalous samples");
}

void require_normals(const Batch& batch) {
  if (batch.normal.maps.empty() || batch.normal_count() == 0)
    throw ConfigError("batch needs at least one normal sample");
}

Tensor hinge(const Tensor& energy, double a) {
  return ops::mean(ops::max_elemwise(ops::add_scalar(ops::neg(energy), a), 0.0));
}

std::optional<Tensor> anomalous_term(const LossConstants& c, const Batch& batch,
                                     const std::function<Tensor(const FeatureBatch&)>& energy) {
  if (c.gamma == 1.0) return std::nullopt;
  require_anomalies(batch, "anomaly-aware loss with gamma < 1");
  return energy(batch.anomalous);
}

}  // namespace

std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::kRecon: return "Recon";
    case Strategy::kReconSub: return "ReconSub";
    case Strategy::kGan: return "GAN";
    case Strategy::kCkaImg: return "CKAImg";
    case Strategy::kCkaPatch: return "CKAPatch";
  }
  return "?";
}

Strategy parse_strategy(const std::string& name) {
  std::string n = name;
  std::transform(n.begin(), n.end(), n.begin(), [](unsigned char ch) { return std::tolower(ch); });
  if (n == "recon") return Strategy::kRecon;
  if (n == "reconsub") return Strategy::kReconSub;
  if (n == "gan") return Strategy::kGan;
  if (n == "ckaimg") return Strategy::kCkaImg;
  if (n == "ckapatch") return Strategy::kCkaPatch;
  throw ConfigError("unknown strategy '" + name + "' (Recon, ReconSub, GAN, CKAImg, CKAPatch)");
}

bool uses_anomalies(Strategy s) { return s != Strategy::kRecon; }

bool has_discriminator(Strategy s) {
  return s == Strategy::kGan || s == Strategy::kCkaImg || s == Strategy::kCkaPatch;
}

void LossConstants::validate() const {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("alpha must be in (0, 1]");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("gamma must be in (0, 1]");
  if (!(lambda >= 0.0)) throw ConfigError("lambda must be non-negative");
  if (!(a > 0.0)) throw ConfigError("hinge threshold a must be positive");
}

Generated generate(const AutoEncoder& ae, const Batch& batch) {
  require_normals(batch);
  Generated g;
  const std::size_t nn = batch.normal_count();
  if (!batch.has_anomalies()) {
    g.all = ae.reconstruct(batch.normal);
    g.normal_part = g.all;
    return g;
  }
  g.all = ae.reconstruct(concat_batches(batch.normal, batch.anomalous));
  const std::size_t total = g.all.batch_size();
  g.normal_part = slice_batch(g.all, 0, nn);
  g.anomalous_part = slice_batch(g.all, nn, total);
  return g;
}

Tensor recon_loss(const FeatureBatch& recon, const FeatureBatch& target) {
  if (recon.maps.size() != target.maps.size() || recon.maps.empty())
    throw DimensionError("recon_loss: scale count mismatch");
  std::optional<Tensor> total;
  for (std::size_t s = 0; s < recon.maps.size(); ++s) {
    Tensor term = ops::mean(ops::add_scalar(ops::neg(ops::cosine_rows(recon.maps[s], target.maps[s])), 1.0));
    total = total ? ops::add(*total, term) : term;
  }
  return *total;
}

Tensor loss_recon_plus(const Batch& batch, const Generated& gen) {
  require_normals(batch);
  return recon_loss(gen.normal_part, batch.normal);
}

Tensor loss_recon_sub(const Batch& batch, const Generated& gen, double lambda) {
  require_anomalies(batch, "ReconSub");
  Tensor minus = recon_loss(gen.anomalous_part, batch.anomalous);
  return ops::sub(loss_recon_plus(batch, gen), ops::scale(minus, lambda));
}

Tensor disc_hinge_loss(const Tensor& e_normal, const Tensor& e_generated,
                       const std::optional<Tensor>& e_anomalous, const LossConstants& c) {
  Tensor loss = ops::add(ops::mean(e_normal), ops::scale(hinge(e_generated, c.a), c.gamma));
  if (c.gamma < 1.0) {
    if (!e_anomalous) throw ConfigError("hinge loss with gamma < 1 needs anomalous energies");
    loss = ops::add(loss, ops::scale(hinge(*e_anomalous, c.a), 1.0 - c.gamma));
  }
  return loss;
}

Tensor gen_energy_loss(const Tensor& e_normal, const Tensor& e_generated,
                       const std::optional<Tensor>& e_anomalous, const LossConstants& c) {
  Tensor loss = ops::sub(ops::scale(ops::mean(e_generated), c.gamma), ops::mean(e_normal));
  if (c.gamma < 1.0) {
    if (!e_anomalous) throw ConfigError("generator energy loss with gamma < 1 needs anomalous energies");
    loss = ops::add(loss, ops::scale(ops::mean(*e_anomalous), 1.0 - c.gamma));
  }
  return loss;
}

Tensor loss_disc_image(const Discriminator& d, const Batch& batch, const Generated& gen,
                       const LossConstants& c) {
  require_normals(batch);
  const auto mode = ParamMode::kTrainable;
  auto energy = [&](const FeatureBatch& f) { return d.energy_image(f.detach(), mode); };
  return disc_hinge_loss(energy(batch.normal), energy(gen.all), anomalous_term(c, batch, energy), c);
}

Tensor loss_gen_image(const Discriminator& d, const Batch& batch, const Generated& gen,
                      const LossConstants& c) {
  require_normals(batch);
  const auto mode = ParamMode::kFrozen;
  auto energy = [&](const FeatureBatch& f) { return d.energy_image(f.detach(), mode); };
  return gen_energy_loss(energy(batch.normal), d.energy_image(gen.all, mode),
                         anomalous_term(c, batch, energy), c);
}

Tensor loss_disc_patch(const Discriminator& d, const Batch& batch, const Generated& gen,
                       const LossConstants& c) {
  require_normals(batch);
  std::optional<Tensor> total;
  for (std::size_t s = 0; s < d.num_scales(); ++s) {
    auto energy = [&](const FeatureBatch& f) {
      return d.energy_map(s, f.maps[s].detach(), ParamMode::kTrainable);
    };
    Tensor term = disc_hinge_loss(energy(batch.normal), energy(gen.all), anomalous_term(c, batch, energy), c);
    total = total ? ops::add(*total, term) : term;
  }
  return *total;
}

Tensor loss_gen_patch(const Discriminator& d, const Batch& batch, const Generated& gen,
                      const LossConstants& c) {
  require_normals(batch);
  std::optional<Tensor> total;
  for (std::size_t s = 0; s < d.num_scales(); ++s) {
    auto energy = [&](const FeatureBatch& f) {
      return d.energy_map(s, f.maps[s].detach(), ParamMode::kFrozen);
    };
    Tensor term = gen_energy_loss(energy(batch.normal), d.energy_map(s, gen.all.maps[s], ParamMode::kFrozen),
                                  anomalous_term(c, batch, energy), c);
    total = total ? ops::add(*total, term) : term;
  }
  return *total;
}

Tensor loss_gan_disc(const Discriminator& d, const Batch& batch, const Generated& gen) {
  require_normals(batch);
  Tensor real = d.image_logits(batch.normal.detach(), ParamMode::kTrainable);
  Tensor fake = d.image_logits(gen.all.detach(), ParamMode::kTrainable);
  // -log sigmoid(l) = softplus(-l); -log(1 - sigmoid(l)) = softplus(l)
  return ops::add(ops::mean(ops::softplus(ops::neg(real))), ops::mean(ops::softplus(fake)));
}

Tensor loss_gan_gen(const Discriminator& d, const Generated& gen) {
  Tensor fake = d.image_logits(gen.all, ParamMode::kFrozen);
  return ops::mean(ops::softplus(ops::neg(fake)));
}

GanLosses loss_gan_pair(const Discriminator& d, const Batch& batch, const Generated& gen) {
  return {loss_gan_disc(d, batch, gen), loss_gan_gen(d, gen)};
}

std::optional<Tensor> disc_objective(Strategy s, const Discriminator& d, const Batch& batch,
                                     const Generated& gen, const LossConstants& c) {
  switch (s) {
    case Strategy::kRecon:
    case Strategy::kReconSub: return std::nullopt;
    case Strategy::kGan: return loss_gan_disc(d, batch, gen);
    case Strategy::kCkaImg: return loss_disc_image(d, batch, gen, c);
    case Strategy::kCkaPatch: return loss_disc_patch(d, batch, gen, c);
  }
  return std::nullopt;
}

Tensor gen_objective(Strategy s, const Discriminator& d, const Batch& batch, const Generated& gen,
                     const LossConstants& c) {
  if (uses_anomalies(s)) require_anomalies(batch, to_string(s).c_str());
  Tensor rec = loss_recon_plus(batch, gen);
  switch (s) {
    case Strategy::kRecon: return rec;
    case Strategy::kReconSub: return loss_recon_sub(batch, gen, c.lambda);
    case Strategy::kGan: return ops::add(rec, ops::scale(loss_gan_gen(d, gen), c.lambda));
    case Strategy::kCkaImg: return ops::add(rec, ops::scale(loss_gen_image(d, batch, gen, c), c.lambda));
    case Strategy::kCkaPatch: return ops::add(rec, ops::scale(loss_gen_patch(d, batch, gen, c), c.lambda));
  }
  return rec;
}

Objectives total_objectives(Strategy s, const AutoEncoder& ae, const Discriminator& d,
                            const Batch& batch, const LossConstants& c) {
  c.validate();
  if (uses_anomalies(s)) require_anomalies(batch, to_string(s).c_str());
  Generated gen = generate(ae, batch);
  Objectives out;
  out.d_loss = disc_objective(s, d, batch, gen, c);
  out.g_loss = gen_objective(s, d, batch, gen, c);
  out.recon_plus = loss_recon_plus(batch, gen);
  return out;
}

}  // namespace ckad
