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

// Command-line front end: gen-data, train, score, eval, verify-theory,
// grad-check.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "ckad/datagen.hpp"
#include "ckad/error.hpp"
#include "ckad/gradcheck.hpp"
#include "ckad/pipeline.hpp"
#include "ckad/theory.hpp"
#include "ckad/trainer.hpp"

namespace fs = std::filesystem;

namespace {

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::trunc | std::ios::binary);
  if (!out) throw ckad::IoError("cannot write " + p.string());
  out << text;
}

fs::path manifest_path(const fs::path& p) {
  const fs::path file = fs::is_directory(p) ? p / "manifest.tsv" : p;
  if (!fs::exists(file)) throw ckad::IoError("dataset manifest not found: " + file.string());
  return file;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coarse-knowledge-aware adversarial anomaly detection at desk scale"};
  app.require_subcommand(1);

  std::string config, out, strategy, dataset, model, scores;
  std::optional<std::uint64_t> seed;
  std::optional<double> rl;
  std::size_t k = ckad::kDefaultTopK, bins = 20, probes = ckad::gradcheck::kDefaultProbes;
  double sigma = ckad::kDefaultSigma;
  bool resume = false, verbose = false;

  auto* gen = app.add_subcommand("gen-data", "Generate the synthetic dataset");
  gen->add_option("--config", config, "Generation parameters (key = value)");
  gen->add_option("--out", out, "Output directory")->required();
  gen->add_option("--seed", seed, "Generation seed");
  gen->add_option("--rl", rl, "Coarse train anomalies as a fraction of train normals");

  auto* tr = app.add_subcommand("train", "Train a model");
  tr->add_option("--config", config, "Training config (key = value)")->required();
  tr->add_option("--out", out, "Checkpoint directory")->required();
  tr->add_option("--seed", seed, "Override the config seed");
  tr->add_option("--strategy", strategy, "Override the strategy (Recon, ReconSub, GAN, CKAImg, CKAPatch)");
  tr->add_option("--dataset", dataset, "Override the dataset manifest");
  tr->add_flag("--resume", resume, "Continue from the checkpoint in --out");
  tr->add_flag("--verbose", verbose, "Print progress once per epoch");

  auto* sc = app.add_subcommand("score", "Score the test split");
  sc->add_option("--model", model, "Checkpoint directory")->required();
  sc->add_option("--out", out, "Output directory")->required();
  sc->add_option("--dataset", dataset, "Dataset manifest (default: the one used for training)");
  sc->add_option("--k", k, "Top-k pixels averaged into the image score");
  sc->add_option("--sigma", sigma, "Gaussian smoothing std (0 disables)");

  auto* ev = app.add_subcommand("eval", "Compute metrics from stored scores");
  ev->add_option("--scores", scores, "Directory written by score")->required();
  ev->add_option("--out", out, "Output directory")->required();
  ev->add_option("--bins", bins, "Histogram bins");

  auto* vt = app.add_subcommand("verify-theory", "Check the equilibrium results on discrete games");
  vt->add_option("--out", out, "Directory for report.txt and games.csv");
  vt->add_option("--seed", seed, "Seed of the random games");

  auto* gc = app.add_subcommand("grad-check", "Finite-difference gradient report");
  gc->add_option("--seed", seed, "Probe seed");
  gc->add_option("--out", out, "Directory for gradcheck.txt");
  gc->add_option("--probes", probes, "Probes per op");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "ckad: " << e.what() << '\n';
    return 2;
  }

  try {
    if (gen->parsed()) {
      ckad::GenParams p = config.empty() ? ckad::GenParams{} : ckad::GenParams::load(config);
      if (seed) p.seed = *seed;
      if (rl) p.rl = *rl;
      const auto m = ckad::gen_dataset(p, out);
      std::cout << "wrote " << m.entries.size() << " entries to " << (fs::path(out) / "manifest.tsv").string() << '\n';
    } else if (tr->parsed()) {
      ckad::TrainConfig cfg = ckad::TrainConfig::load(config);
      if (seed) cfg.seed = *seed;
      if (!strategy.empty()) cfg.strategy = ckad::parse_strategy(strategy);
      if (!dataset.empty()) cfg.dataset = dataset;
      if (cfg.dataset.empty()) throw ckad::ConfigError("no dataset given (config key 'dataset' or --dataset)");
      const fs::path mpath = manifest_path(cfg.dataset);
      cfg.dataset = fs::absolute(mpath).string();
      cfg.validate();
      const auto manifest = ckad::DatasetManifest::load(mpath);
      manifest.validate();
      const ckad::RandomBackbone backbone(ckad::backbone_config_for(manifest, cfg.backbone_seed));
      auto feats = std::make_shared<const ckad::TrainFeatures>(ckad::extract_train_features(manifest, backbone));
      const auto res = ckad::train(cfg, feats, out, {resume, std::nullopt, verbose});
      std::cout << "trained " << res.steps << " steps into " << out << '\n';
    } else if (sc->parsed()) {
      const auto loaded = ckad::load_model(model);
      const fs::path mpath = manifest_path(dataset.empty() ? fs::path(loaded.cfg.dataset) : fs::path(dataset));
      const auto manifest = ckad::DatasetManifest::load(mpath);
      const ckad::RandomBackbone backbone(ckad::backbone_config_for(manifest, loaded.cfg.backbone_seed));
      const auto test = ckad::load_test_set(manifest, backbone);
      const auto s = ckad::score_test_set(*loaded.ae, test, k, sigma);
      ckad::write_scores(s, out, mpath);
      std::cout << "scored " << s.scores.size() << " test images into " << out << '\n';
    } else if (ev->parsed()) {
      fs::path mpath;
      const auto s = ckad::read_scores(scores, &mpath);
      const auto labels = ckad::load_test_labels(ckad::DatasetManifest::load(manifest_path(mpath)));
      const auto r = ckad::evaluate(s, labels);
      ckad::write_evaluation(r, s, out, bins);
      std::cout << ckad::metrics_csv(r);
    } else if (vt->parsed()) {
      const auto run = ckad::theory::run_theory(ckad::theory::default_games(seed.value_or(2024)));
      std::cout << run.text;
      if (!out.empty()) {
        fs::create_directories(out);
        write_file(fs::path(out) / "report.txt", run.text);
        write_file(fs::path(out) / "games.csv", run.csv);
      }
      if (!run.all_pass()) {
        std::cerr << "ckad: verify-theory: at least one assertion failed\n";
        return 1;
      }
    } else if (gc->parsed()) {
      auto results = ckad::gradcheck::check_ops(probes, seed.value_or(5));
      const auto losses = ckad::gradcheck::check_losses(probes, seed.value_or(5));
      results.insert(results.end(), losses.begin(), losses.end());
      const std::string text = ckad::gradcheck::report(results);
      std::cout << text;
      if (!out.empty()) {
        fs::create_directories(out);
        write_file(fs::path(out) / "gradcheck.txt", text);
      }
      if (!ckad::gradcheck::all_pass(results)) {
        std::cerr << "ckad: grad-check: tolerance exceeded\n";
        return 1;
      }
    }
  } catch (const ckad::UsageError& e) {
    std::cerr << "ckad: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "ckad: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
