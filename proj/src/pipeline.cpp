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

#include "ckad/pipeline.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ckad/error.hpp"
#include "ckad/ops.hpp"
#include "ckad/tensor_file.hpp"
#include "ckad/trainer.hpp"

namespace ckad {
namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text(const std::filesystem::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::trunc | std::ios::binary);
  if (!out) throw IoError("cannot write " + file.string());
  out << text;
}

}  // namespace

TestSet load_test_labels(const DatasetManifest& m) {
  m.validate();
  TestSet t;
  const auto entries = m.select(Split::kTest);
  if (entries.empty()) throw FormatError("manifest in " + m.root.string() + " has no test entries");
  for (const auto* e : entries) {
    t.ids.push_back(e->image);
    t.labels.push_back(e->label == Label::kAnomalous ? 1 : 0);
    if (e->mask) {
      Tensor mask = load_tensor(m.resolve(*e->mask));
      if (mask.ndim() != 2) throw FormatError("mask " + m.resolve(*e->mask).string() + " is not [H, W]");
      for (double v : mask.data())
        if (v != 0.0 && v != 1.0) throw FormatError("mask " + m.resolve(*e->mask).string() + " is not binary");
      t.masks.push_back(mask);
    } else {
      t.masks.emplace_back();
    }
  }
  for (const auto& mk : t.masks)
    if (mk.defined()) {
      t.height = mk.dim(0);
      t.width = mk.dim(1);
      break;
    }
  if (t.height == 0) {
    const Tensor img = load_tensor(m.resolve(t.ids[0]));
    t.height = img.dim(1);
    t.width = img.dim(2);
  }
  for (auto& mk : t.masks) {
    if (!mk.defined()) mk = Tensor({t.height, t.width}, 0.0);
    if (mk.dim(0) != t.height || mk.dim(1) != t.width) throw FormatError("test masks differ in size");
  }
  return t;
}

TestSet load_test_set(const DatasetManifest& m, const RandomBackbone& backbone) {
  TestSet t = load_test_labels(m);
  if (t.height != backbone.config().input_size)
    throw FormatError("test images are " + std::to_string(t.height) + " pixels, backbone expects " +
                      std::to_string(backbone.config().input_size));
  t.features = extract_entries(m, m.select(Split::kTest), backbone);
  return t;
}

ScoreSet score_test_set(const AutoEncoder& ae, const TestSet& test, std::size_t k, double sigma) {
  constexpr std::size_t kChunk = 16;
  NoGradGuard ng;
  ScoreSet s;
  s.ids = test.ids;
  s.labels = test.labels;
  for (std::size_t begin = 0; begin < test.features.size(); begin += kChunk) {
    const std::size_t end = std::min(test.features.size(), begin + kChunk);
    std::vector<const FeaturePyramid*> ptrs;
    for (std::size_t i = begin; i < end; ++i) ptrs.push_back(&test.features[i]);
    const FeatureBatch recon = ae.reconstruct(stack_pyramids(ptrs));
    for (std::size_t i = begin; i < end; ++i) {
      const auto& pyr = test.features[i];
      const FeaturePyramid rec = unstack(recon, pyr.scales, i - begin);
      ScoreMap map = score_map(pyr, rec, test.height, test.width, sigma);
      s.scores.push_back(image_score(map, k));
      s.maps.push_back(map.values);
    }
  }
  return s;
}

void write_scores(const ScoreSet& s, const std::filesystem::path& out, const std::filesystem::path& manifest) {
  std::filesystem::create_directories(out / "maps");
  std::ostringstream csv;
  csv << "index,image,label,score\n";
  for (std::size_t i = 0; i < s.scores.size(); ++i) {
    save_tensor(out / "maps" / (std::to_string(i) + ".ckt"), s.maps[i]);
    csv << i << ',' << s.ids[i] << ',' << (s.labels[i] ? "anomalous" : "normal") << ',' << fmt(s.scores[i]) << '\n';
  }
  write_text(out / "scores.csv", csv.str());
  write_text(out / "dataset.txt", std::filesystem::absolute(manifest).string() + "\n");
}

ScoreSet read_scores(const std::filesystem::path& dir, std::filesystem::path* manifest) {
  std::ifstream in(dir / "scores.csv");
  if (!in) throw IoError("cannot read " + (dir / "scores.csv").string());
  ScoreSet s;
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 4) throw FormatError("malformed row in " + (dir / "scores.csv").string() + ": " + line);
    double v = 0.0;
    const auto r = std::from_chars(f[3].data(), f[3].data() + f[3].size(), v);
    if (r.ec != std::errc()) throw FormatError("bad score '" + f[3] + "' in " + (dir / "scores.csv").string());
    s.ids.push_back(f[1]);
    s.labels.push_back(f[2] == "anomalous" ? 1 : 0);
    s.scores.push_back(v);
    s.maps.push_back(load_tensor(dir / "maps" / (f[0] + ".ckt")));
  }
  if (manifest) {
    std::ifstream d(dir / "dataset.txt");
    std::string p;
    if (!d || !std::getline(d, p)) throw IoError("cannot read " + (dir / "dataset.txt").string());
    *manifest = p;
  }
  return s;
}

EnergyGap patch_energy_gap(const Discriminator& d, const TestSet& test) {
  NoGradGuard ng;
  EnergyGap out;
  if (test.features.empty()) throw ConfigError("energy gap needs test features");
  const std::size_t scales = test.features[0].maps.size();
  for (std::size_t s = 0; s < scales; ++s) {
    double sum_a = 0.0, n_a = 0.0, sum_n = 0.0, n_n = 0.0;
    for (std::size_t i = 0; i < test.features.size(); ++i) {
      const Tensor& f = test.features[i].maps[s];
      const std::size_t h = f.dim(1), w = f.dim(2);
      const Tensor e = d.energy_map(s, ops::reshape(f, {1, f.dim(0), h, w}), ParamMode::kFrozen);
      const auto ev = e.data();
      if (!test.labels[i]) {
        for (double v : ev) sum_n += v;
        n_n += static_cast<double>(ev.size());
        continue;
      }
      const auto m = test.masks[i].data();
      const std::size_t cy = test.height / h, cx = test.width / w;
      for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x) {
          bool hit = false;
          for (std::size_t yy = y * cy; yy < (y + 1) * cy && !hit; ++yy)
            for (std::size_t xx = x * cx; xx < (x + 1) * cx && !hit; ++xx) hit = m[yy * test.width + xx] > 0.5;
          if (hit) {
            sum_a += ev[y * w + x];
            n_a += 1.0;
          }
        }
    }
    out.anomalous_region += (n_a > 0.0 ? sum_a / n_a : 0.0) / static_cast<double>(scales);
    out.normal += (n_n > 0.0 ? sum_n / n_n : 0.0) / static_cast<double>(scales);
  }
  return out;
}

MetricsReport evaluate(const ScoreSet& s, const TestSet& labels, double fpr_limit) {
  if (s.ids != labels.ids) throw FormatError("scores do not match the manifest's test split");
  MetricsReport r;
  r.auroc = auroc(s.scores, s.labels);
  const auto f1 = best_f1_acc(s.scores, s.labels);
  r.f1 = f1.f1;
  r.acc = f1.acc;
  r.threshold = f1.threshold;
  r.pixel_auroc = pixel_auroc(s.maps, labels.masks);
  r.pro = pro(s.maps, labels.masks, fpr_limit);
  return r;
}

void write_evaluation(const MetricsReport& r, const ScoreSet& s, const std::filesystem::path& out,
                      std::size_t bins) {
  std::filesystem::create_directories(out);
  write_text(out / "metrics.csv", metrics_csv(r));
  write_text(out / "histogram.csv", histogram_csv(score_histogram(s.scores, s.labels, bins)));
}

}  // namespace ckad
