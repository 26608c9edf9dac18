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

#pragma once

#include <optional>
#include <string>

#include "ckad/autoencoder.hpp"
#include "ckad/backbone.hpp"
#include "ckad/discriminator.hpp"

namespace ckad {

enum class Strategy { kRecon, kReconSub, kGan, kCkaImg, kCkaPatch };

std::string to_string(Strategy s);
// Accepts the names printed by to_string (case-insensitive).
Strategy parse_strategy(const std::string& name);
bool uses_anomalies(Strategy s);
bool has_discriminator(Strategy s);

struct LossConstants {
  double alpha = 0.5;    // normal share of the generator's input mixture
  double gamma = 0.5;    // generated vs anomalous weight in the hinge terms
  double lambda = 0.02;  // adversarial (or subtracted) term weight
  double a = 1.0;        // hinge threshold

  void validate() const;
};

struct Batch {
  FeatureBatch normal;
  FeatureBatch anomalous;  // empty maps when the batch has no anomalies

  bool has_anomalies() const { return !anomalous.maps.empty() && anomalous.batch_size() > 0; }
  std::size_t normal_count() const { return normal.batch_size(); }
};

// Generator output on the mixed input normal ++ anomalous.
struct Generated {
  FeatureBatch all;
  FeatureBatch normal_part;
  FeatureBatch anomalous_part;  // empty when the batch has no anomalies
};

Generated generate(const AutoEncoder& ae, const Batch& batch);

// mean over samples of sum over scales of (1 - cos(flatten(recon), flatten(target)))
Tensor recon_loss(const FeatureBatch& recon, const FeatureBatch& target);

Tensor loss_recon_plus(const Batch& batch, const Generated& gen);
Tensor loss_recon_sub(const Batch& batch, const Generated& gen, double lambda);

// Energy-level building blocks shared by the image and patch losses. Each
// energy tensor is averaged over all of its elements. e_anomalous may be
// absent only when gamma == 1.
Tensor disc_hinge_loss(const Tensor& e_normal, const Tensor& e_generated,
                       const std::optional<Tensor>& e_anomalous, const LossConstants& c);
Tensor gen_energy_loss(const Tensor& e_normal, const Tensor& e_generated,
                       const std::optional<Tensor>& e_anomalous, const LossConstants& c);

// Discriminator losses see the generator output detached; generator losses
// see the discriminator frozen.
Tensor loss_disc_image(const Discriminator& d, const Batch& batch, const Generated& gen,
                       const LossConstants& c);
Tensor loss_gen_image(const Discriminator& d, const Batch& batch, const Generated& gen,
                      const LossConstants& c);
Tensor loss_disc_patch(const Discriminator& d, const Batch& batch, const Generated& gen,
                       const LossConstants& c);
Tensor loss_gen_patch(const Discriminator& d, const Batch& batch, const Generated& gen,
                      const LossConstants& c);

struct GanLosses {
  Tensor d_loss;
  Tensor g_adv;
};
// Non-saturating log-loss baseline on the image head's logits: real =
// normal features, fake = generator output.
Tensor loss_gan_disc(const Discriminator& d, const Batch& batch, const Generated& gen);
Tensor loss_gan_gen(const Discriminator& d, const Generated& gen);
GanLosses loss_gan_pair(const Discriminator& d, const Batch& batch, const Generated& gen);

// Discriminator objective of a strategy (none for Recon / ReconSub).
std::optional<Tensor> disc_objective(Strategy s, const Discriminator& d, const Batch& batch,
                                     const Generated& gen, const LossConstants& c);
// Generator objective: L+rec, plus the strategy's extra term.
Tensor gen_objective(Strategy s, const Discriminator& d, const Batch& batch, const Generated& gen,
                     const LossConstants& c);

struct Objectives {
  std::optional<Tensor> d_loss;
  Tensor g_loss;
  Tensor recon_plus;
};

Objectives total_objectives(Strategy s, const AutoEncoder& ae, const Discriminator& d,
                            const Batch& batch, const LossConstants& c);

}  // namespace ckad
