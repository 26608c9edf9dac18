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

#include "ckad/datagen.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <cmath>
#include <numbers>
#include <sstream>

#include "ckad/error.hpp"
#include "ckad/image_ops.hpp"
#include "ckad/rng.hpp"
#include "ckad/tensor_file.hpp"

namespace ckad {

void GenParams::validate() const {
  if (image_size < 8) throw ConfigError("image size must be at least 8");
  if (channels != 1 && channels != 3) throw ConfigError("images have 1 or 3 channels");
  if (cutoff == 0 || waves == 0) throw ConfigError("texture needs cutoff >= 1 and waves >= 1");
  if (kinds.empty()) throw ConfigError("at least one defect kind is required");
  if (defect_min == 0 || defect_min > defect_max) throw ConfigError("defect size range is empty");
  if (4 * defect_max >= image_size) throw ConfigError("defect size must stay below image size / 4");
  if (!(contrast_min > 0.0 && contrast_min <= contrast_max && contrast_max <= 1.0))
    throw ConfigError("defect contrast range must satisfy 0 < min <= max <= 1");
  if (!(rl >= 0.0 && rl <= 1.0)) throw ConfigError("rl must be in [0, 1]");
  if (elastic_amplitude < 0.0 || elastic_scale <= 0.0) throw ConfigError("bad elastic parameters");
  if (train_normal == 0) throw ConfigError("need at least one train normal");
}

std::size_t GenParams::train_anomalous() const {
  return static_cast<std::size_t>(std::llround(rl * static_cast<double>(train_normal)));
}

namespace {

double num(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size())
    throw ConfigError("'" + key + "' expects a number, got '" + v + "'");
  return out;
}

std::size_t count(const std::string& key, const std::string& v) {
  std::size_t out = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size())
    throw ConfigError("'" + key + "' expects a non-negative integer, got '" + v + "'");
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

}  // namespace

void GenParams::set(const std::string& key, const std::string& v) {
  if (key == "image_size") image_size = count(key, v);
  else if (key == "channels") channels = count(key, v);
  else if (key == "train_normal") train_normal = count(key, v);
  else if (key == "rl") rl = num(key, v);
  else if (key == "test_normal") test_normal = count(key, v);
  else if (key == "test_anomalous") test_anomalous = count(key, v);
  else if (key == "cutoff") cutoff = count(key, v);
  else if (key == "waves") waves = count(key, v);
  else if (key == "defect_min") defect_min = count(key, v);
  else if (key == "defect_max") defect_max = count(key, v);
  else if (key == "contrast_min") contrast_min = num(key, v);
  else if (key == "contrast_max") contrast_max = num(key, v);
  else if (key == "elastic_amplitude") elastic_amplitude = num(key, v);
  else if (key == "elastic_scale") elastic_scale = num(key, v);
  else if (key == "seed") seed = count(key, v);
  else if (key == "train_anomalies") {
    if (v == "defect") train_anomalies = TrainAnomalyKind::kDefect;
    else if (v == "elastic") train_anomalies = TrainAnomalyKind::kElastic;
    else throw ConfigError("train_anomalies must be 'defect' or 'elastic'");
  } else if (key == "defect_kinds") {
    kinds.clear();
    std::size_t start = 0;
    while (start <= v.size()) {
      const auto comma = v.find(',', start);
      const std::string k = trim(v.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
      if (k == "disk") kinds.push_back(DefectKind::kDisk);
      else if (k == "square") kinds.push_back(DefectKind::kSquare);
      else if (k == "scratch") kinds.push_back(DefectKind::kScratch);
      else throw ConfigError("unknown defect kind '" + k + "'");
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
  } else {
    throw ConfigError("unknown generation key '" + key + "'");
  }
}

GenParams GenParams::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot read config " + file.string());
  GenParams p;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto h = line.find('#'); h != std::string::npos) line.resize(h);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    try {
      if (eq == std::string::npos) throw ConfigError("expected 'key = value'");
      p.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError(file.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return p;
}

Tensor gen_normal(const GenParams& p, std::mt19937_64& rng) {
  const std::size_t n = p.image_size;
  std::uniform_int_distribution<int> freq(-static_cast<int>(p.cutoff), static_cast<int>(p.cutoff));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  struct Wave {
    double fx, fy, phase, amp;
    std::vector<double> gain;
  };
  std::vector<Wave> waves;
  const double base_amp = 0.3 / std::sqrt(static_cast<double>(p.waves));
  while (waves.size() < p.waves) {
    const int fx = freq(rng), fy = freq(rng);
    if (fx == 0 && fy == 0) continue;
    Wave w{static_cast<double>(fx), static_cast<double>(fy), 2.0 * std::numbers::pi * unit(rng),
           base_amp * (0.5 + 0.5 * unit(rng)), {}};
    for (std::size_t c = 0; c < p.channels; ++c) w.gain.push_back(0.6 + 0.4 * unit(rng));
    waves.push_back(std::move(w));
  }
  std::vector<double> v(p.channels * n * n);
  const double k = 2.0 * std::numbers::pi / static_cast<double>(n);
  for (std::size_t c = 0; c < p.channels; ++c)
    for (std::size_t y = 0; y < n; ++y)
      for (std::size_t x = 0; x < n; ++x) {
        double s = 0.5;
        for (const auto& w : waves)
          s += w.amp * w.gain[c] * std::cos(k * (w.fx * static_cast<double>(x) + w.fy * static_cast<double>(y)) + w.phase);
        v[(c * n + y) * n + x] = std::clamp(s, 0.0, 1.0);
      }
  return Tensor({p.channels, n, n}, std::move(v));
}

DefectSample plant_defect(const Tensor& image, const GenParams& p, std::mt19937_64& rng) {
  const std::size_t c = image.dim(0), n = image.dim(1);
  std::uniform_int_distribution<std::size_t> kind_pick(0, p.kinds.size() - 1);
  std::uniform_int_distribution<std::size_t> size_pick(p.defect_min, p.defect_max);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const DefectKind kind = p.kinds[kind_pick(rng)];
  const std::size_t size = size_pick(rng);
  const double contrast = p.contrast_min + (p.contrast_max - p.contrast_min) * unit(rng);
  const double margin = static_cast<double>(size);
  const double cy = margin + (static_cast<double>(n) - 2.0 * margin) * unit(rng);
  const double cx = margin + (static_cast<double>(n) - 2.0 * margin) * unit(rng);
  const double angle = std::numbers::pi * unit(rng);
  const double half = 0.5 * static_cast<double>(size);

  std::vector<double> mask(n * n, 0.0);
  for (std::size_t y = 0; y < n; ++y)
    for (std::size_t x = 0; x < n; ++x) {
      const double dy = static_cast<double>(y) + 0.5 - cy, dx = static_cast<double>(x) + 0.5 - cx;
      bool inside = false;
      switch (kind) {
        case DefectKind::kDisk: inside = dx * dx + dy * dy <= half * half; break;
        case DefectKind::kSquare: inside = std::abs(dx) <= half && std::abs(dy) <= half; break;
        case DefectKind::kScratch: {
          // Distance to a segment of length `size` through the centre.
          const double ux = std::cos(angle), uy = std::sin(angle);
          const double along = std::clamp(dx * ux + dy * uy, -half, half);
          const double px = dx - along * ux, py = dy - along * uy;
          inside = px * px + py * py <= 1.0;
          break;
        }
      }
      if (inside) mask[y * n + x] = 1.0;
    }

  // Push away from the nearer end of [0, 1].
  double inside_mean = 0.0, count = 0.0;
  const auto src = image.data();
  for (std::size_t ch = 0; ch < c; ++ch)
    for (std::size_t i = 0; i < n * n; ++i)
      if (mask[i] > 0.0) {
        inside_mean += src[ch * n * n + i];
        count += 1.0;
      }
  inside_mean /= std::max(count, 1.0);
  const double delta = inside_mean > 0.5 ? -contrast : contrast;
  std::vector<double> out(src.begin(), src.end());
  for (std::size_t ch = 0; ch < c; ++ch)
    for (std::size_t i = 0; i < n * n; ++i)
      if (mask[i] > 0.0) out[ch * n * n + i] = std::clamp(out[ch * n * n + i] + delta, 0.0, 1.0);
  return {Tensor(image.shape(), std::move(out)), Tensor({n, n}, std::move(mask)), kind};
}

Tensor elastic_distort(const Tensor& image, double amplitude, double scale, std::mt19937_64& rng) {
  if (amplitude < 0.0) throw ConfigError("elastic amplitude must be non-negative");
  const std::size_t c = image.dim(0), h = image.dim(1), w = image.dim(2);
  if (amplitude == 0.0) return image.clone();
  std::normal_distribution<double> nd(0.0, 1.0);
  auto field = [&]() {
    std::vector<double> f(h * w);
    for (auto& v : f) v = nd(rng);
    f = image::gaussian_blur(f, h, w, scale);
    double m = 0.0, s = 0.0;
    for (double v : f) m += v;
    m /= static_cast<double>(f.size());
    for (double v : f) s += (v - m) * (v - m);
    s = std::sqrt(s / static_cast<double>(f.size()));
    for (auto& v : f) v = (v - m) / std::max(s, 1e-12) * amplitude;
    return f;
  };
  const auto dy = field();
  const auto dx = field();
  const auto src = image.data();
  std::vector<double> out(src.size());
  for (std::size_t ch = 0; ch < c; ++ch) {
    const double* plane = src.data() + ch * h * w;
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x)
        out[(ch * h + y) * w + x] = image::sample_bilinear(plane, h, w, static_cast<double>(y) + dy[y * w + x],
                                                           static_cast<double>(x) + dx[y * w + x]);
  }
  return Tensor(image.shape(), std::move(out));
}

DatasetManifest gen_dataset(const GenParams& p, const std::filesystem::path& out) {
  p.validate();
  namespace fs = std::filesystem;
  fs::create_directories(out / "images");
  fs::create_directories(out / "masks");
  DatasetManifest m;
  m.root = out;
  std::ostringstream kinds;
  for (auto k : p.kinds) kinds << (k == DefectKind::kDisk ? "d" : k == DefectKind::kSquare ? "s" : "x");
  m.meta = {{"seed", std::to_string(p.seed)},
            {"image_size", std::to_string(p.image_size)},
            {"channels", std::to_string(p.channels)},
            {"rl", std::to_string(p.rl)},
            {"defect_kinds", kinds.str()},
            {"defect_size", std::to_string(p.defect_min) + ".." + std::to_string(p.defect_max)},
            {"train_anomalies", p.train_anomalies == TrainAnomalyKind::kDefect ? "defect" : "elastic"}};

  auto rng_for = [&](const char* tag, std::size_t i) { return std::mt19937_64(derive_seed(p.seed, tag, i)); };
  auto add = [&](Split split, Label label, const std::string& stem, const Tensor& img,
                 const Tensor* mask) {
    DatasetEntry e{split, label, "images/" + stem + ".ckt", std::nullopt};
    save_tensor(out / e.image, img);
    if (mask) {
      e.mask = "masks/" + stem + ".ckt";
      save_tensor(out / *e.mask, *mask);
    }
    m.entries.push_back(std::move(e));
  };
  auto name = [](const char* prefix, std::size_t i) {
    std::ostringstream os;
    os << prefix << '_';
    os.width(4);
    os.fill('0');
    os << i;
    return os.str();
  };

  for (std::size_t i = 0; i < p.train_normal; ++i) {
    auto rng = rng_for("train-normal", i);
    add(Split::kTrain, Label::kNormal, name("train_normal", i), gen_normal(p, rng), nullptr);
  }
  for (std::size_t i = 0; i < p.train_anomalous(); ++i) {
    auto rng = rng_for("train-anomalous", i);
    Tensor base = gen_normal(p, rng);
    Tensor img = p.train_anomalies == TrainAnomalyKind::kDefect
                     ? plant_defect(base, p, rng).image
                     : elastic_distort(base, p.elastic_amplitude, p.elastic_scale, rng);
    add(Split::kTrain, Label::kAnomalous, name("train_anomalous", i), img, nullptr);
  }
  for (std::size_t i = 0; i < p.test_normal; ++i) {
    auto rng = rng_for("test-normal", i);
    add(Split::kTest, Label::kNormal, name("test_normal", i), gen_normal(p, rng), nullptr);
  }
  for (std::size_t i = 0; i < p.test_anomalous; ++i) {
    auto rng = rng_for("test-anomalous", i);
    auto d = plant_defect(gen_normal(p, rng), p, rng);
    add(Split::kTest, Label::kAnomalous, name("test_anomalous", i), d.image, &d.mask);
  }
  m.save(out / "manifest.tsv");
  return m;
}

}  // namespace ckad
