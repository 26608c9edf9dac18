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

#include <filesystem>
#include <string>
#include <vector>

#include "ckad/autoencoder.hpp"
#include "ckad/backbone.hpp"
#include "ckad/dataset.hpp"
#include "ckad/discriminator.hpp"
#include "ckad/metrics.hpp"
#include "ckad/scoring.hpp"

namespace ckad {

// Test split with cached backbone features. Normal images get all-zero masks.
struct TestSet {
  std::vector<std::string> ids;  // image paths relative to the manifest
  std::vector<int> labels;
  std::vector<FeaturePyramid> features;
  std::vector<Tensor> masks;
  std::size_t height = 0, width = 0;
};

TestSet load_test_set(const DatasetManifest& m, const RandomBackbone& backbone);
// Masks only, for evaluation of stored score maps.
TestSet load_test_labels(const DatasetManifest& m);

struct ScoreSet {
  std::vector<std::string> ids;
  std::vector<int> labels;
  std::vector<double> scores;
  std::vector<Tensor> maps;
};

ScoreSet score_test_set(const AutoEncoder& ae, const TestSet& test, std::size_t k, double sigma);

// maps/<index>.ckt, scores.csv (`index,image,label,score`) and dataset.txt.
void write_scores(const ScoreSet& s, const std::filesystem::path& out, const std::filesystem::path& manifest);
ScoreSet read_scores(const std::filesystem::path& dir, std::filesystem::path* manifest = nullptr);

// Mean patch energy over defect positions of anomalous test images vs over
// every position of normal test images, averaged over scales. A position is
// a defect position when any mask pixel of its cell is set.
struct EnergyGap {
  double anomalous_region = 0.0;
  double normal = 0.0;
  double gap() const { return anomalous_region - normal; }
};
EnergyGap patch_energy_gap(const Discriminator& d, const TestSet& test);

MetricsReport evaluate(const ScoreSet& s, const TestSet& labels, double fpr_limit = kDefaultFprLimit);
// metrics.csv and histogram.csv.
void write_evaluation(const MetricsReport& r, const ScoreSet& s, const std::filesystem::path& out,
                      std::size_t bins = 20);

}  // namespace ckad
