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

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ckad/adam.hpp"
#include "ckad/autoencoder.hpp"
#include "ckad/backbone.hpp"
#include "ckad/dataset.hpp"
#include "ckad/discriminator.hpp"
#include "ckad/losses.hpp"

namespace ckad {

struct TrainConfig {
  Strategy strategy = Strategy::kCkaPatch;
  std::size_t epochs = 200;
  std::size_t batch_size = 8;
  LossConstants constants;
  double lr_ae = 1e-3;
  double lr_disc = 1e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  std::uint64_t seed = 1;
  std::size_t checkpoint_interval = 0;  // steps between checkpoints; 0 = final only
  std::string dataset;                  // manifest file
  std::uint64_t backbone_seed = 7;

  // `key = value` lines; '#' starts a comment. Unknown keys are errors.
  static TrainConfig parse(const std::string& text, const std::string& origin = "config");
  static TrainConfig load(const std::filesystem::path& file);
  void set(const std::string& key, const std::string& value);
  std::string dump() const;
  void validate() const;

  std::size_t normals_per_batch() const;
  std::size_t anomalies_per_batch() const;
};

// Backbone features of the train split, computed once.
struct TrainFeatures {
  std::vector<FeaturePyramid> normal;
  std::vector<FeaturePyramid> anomalous;
};

BackboneConfig backbone_config_for(const DatasetManifest& m, std::uint64_t seed);
std::vector<FeaturePyramid> extract_entries(const DatasetManifest& m,
                                            const std::vector<const DatasetEntry*>& entries,
                                            const RandomBackbone& backbone);
TrainFeatures extract_train_features(const DatasetManifest& m, const RandomBackbone& backbone);

struct StepRecord {
  std::size_t step = 0;  // 1-based index of the completed step
  std::optional<double> d_loss;
  double g_loss = 0.0;
  double recon_plus = 0.0;
};

std::string log_header();
std::string log_row(const StepRecord& r);

class Trainer {
 public:
  Trainer(TrainConfig cfg, std::shared_ptr<const TrainFeatures> data);

  const TrainConfig& config() const { return cfg_; }
  std::size_t steps_per_epoch() const { return steps_per_epoch_; }
  std::size_t total_steps() const { return steps_per_epoch_ * cfg_.epochs; }
  std::size_t step() const { return step_; }

  // Batch of global step t (0-based); a pure function of (seed, t).
  Batch batch_for_step(std::size_t t) const;
  StepRecord run_step();

  void save_checkpoint(const std::filesystem::path& dir) const;
  // Restores parameters, optimizer moments and the step counter.
  void load_checkpoint(const std::filesystem::path& dir);

  AutoEncoder& ae() { return *ae_; }
  const AutoEncoder& ae() const { return *ae_; }
  Discriminator& disc() { return *disc_; }
  const Discriminator& disc() const { return *disc_; }

 private:
  std::vector<std::size_t> normal_perm(std::size_t epoch) const;
  std::size_t anomaly_at(std::size_t position) const;

  TrainConfig cfg_;
  std::shared_ptr<const TrainFeatures> data_;
  std::unique_ptr<AutoEncoder> ae_;
  std::unique_ptr<Discriminator> disc_;
  std::unique_ptr<Adam> adam_ae_;
  std::unique_ptr<Adam> adam_disc_;
  std::size_t steps_per_epoch_ = 0;
  std::size_t step_ = 0;
};

struct TrainOptions {
  bool resume = false;
  std::optional<std::size_t> stop_after;  // total step count to stop at
  bool verbose = false;
};

struct TrainResult {
  std::vector<StepRecord> log;  // whole log, including rows before a resume
  std::size_t steps = 0;
};

// Trains into `out`: loss.csv, checkpoint files and state.txt. With
// `resume`, continues from the checkpoint already in `out`.
TrainResult train(const TrainConfig& cfg, std::shared_ptr<const TrainFeatures> data,
                  const std::filesystem::path& out, const TrainOptions& opt = {});

// Reads a checkpoint written by `train` into fresh models.
struct LoadedModel {
  TrainConfig cfg;
  std::unique_ptr<AutoEncoder> ae;
  std::unique_ptr<Discriminator> disc;
  std::size_t step = 0;
};
LoadedModel load_model(const std::filesystem::path& dir);

}  // namespace ckad
