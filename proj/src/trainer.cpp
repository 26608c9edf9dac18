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

#include "ckad/trainer.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

#include "ckad/error.hpp"
#include "ckad/rng.hpp"
#include "ckad/tensor_file.hpp"

namespace ckad {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size() || !std::isfinite(out))
    throw ConfigError("'" + key + "' expects a number, got '" + v + "'");
  return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size())
    throw ConfigError("'" + key + "' expects a non-negative integer, got '" + v + "'");
  return out;
}

std::map<std::string, std::string> read_kv(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw FormatError("cannot read " + file.string());
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

std::string shapes_str(const std::vector<Shape>& shapes) {
  std::string s;
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    if (i) s += ';';
    for (std::size_t j = 0; j < shapes[i].size(); ++j) s += (j ? "x" : "") + std::to_string(shapes[i][j]);
  }
  return s;
}

std::vector<Shape> parse_shapes(const std::string& s) {
  std::vector<Shape> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ';')) {
    Shape sh;
    std::stringstream is(item);
    std::string e;
    while (std::getline(is, e, 'x')) sh.push_back(static_cast<std::size_t>(to_u64("scale_shapes", e)));
    if (sh.size() != 3) throw FormatError("bad scale shape '" + item + "' in checkpoint state");
    out.push_back(std::move(sh));
  }
  if (out.empty()) throw FormatError("checkpoint state lists no scale shapes");
  return out;
}

std::vector<StepRecord> read_log(const std::filesystem::path& file, std::size_t up_to) {
  std::vector<StepRecord> rows;
  std::ifstream in(file);
  if (!in) return rows;
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (line.back() == ',') f.emplace_back();
    if (f.size() != 4) throw FormatError("malformed row in " + file.string() + ": " + line);
    StepRecord r;
    r.step = static_cast<std::size_t>(to_u64("step", f[0]));
    if (!f[1].empty()) r.d_loss = to_double("d_loss", f[1]);
    r.g_loss = to_double("g_loss", f[2]);
    r.recon_plus = to_double("recon_plus", f[3]);
    if (r.step <= up_to) rows.push_back(r);
  }
  return rows;
}

void write_log(const std::filesystem::path& file, const std::vector<StepRecord>& rows) {
  std::ofstream out(file, std::ios::trunc);
  if (!out) throw IoError("cannot write " + file.string());
  out << log_header();
  for (const auto& r : rows) out << log_row(r);
}

}  // namespace

TrainConfig TrainConfig::parse(const std::string& text, const std::string& origin) {
  TrainConfig cfg;
  std::stringstream ss(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
    try {
      cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  cfg.validate();
  return cfg;
}

TrainConfig TrainConfig::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot read config " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), file.string());
}

void TrainConfig::set(const std::string& key, const std::string& v) {
  if (key == "strategy") strategy = parse_strategy(v);
  else if (key == "epochs") epochs = to_u64(key, v);
  else if (key == "batch_size") batch_size = to_u64(key, v);
  else if (key == "alpha") constants.alpha = to_double(key, v);
  else if (key == "gamma") constants.gamma = to_double(key, v);
  else if (key == "lambda") constants.lambda = to_double(key, v);
  else if (key == "a") constants.a = to_double(key, v);
  else if (key == "lr_ae") lr_ae = to_double(key, v);
  else if (key == "lr_disc") lr_disc = to_double(key, v);
  else if (key == "beta1") beta1 = to_double(key, v);
  else if (key == "beta2") beta2 = to_double(key, v);
  else if (key == "seed") seed = to_u64(key, v);
  else if (key == "checkpoint_interval") checkpoint_interval = to_u64(key, v);
  else if (key == "dataset") dataset = v;
  else if (key == "backbone_seed") backbone_seed = to_u64(key, v);
  else throw ConfigError("unknown config key '" + key + "'");
}

std::string TrainConfig::dump() const {
  std::ostringstream os;
  os << "strategy = " << to_string(strategy) << '\n'
     << "epochs = " << epochs << '\n'
     << "batch_size = " << batch_size << '\n'
     << "alpha = " << fmt(constants.alpha) << '\n'
     << "gamma = " << fmt(constants.gamma) << '\n'
     << "lambda = " << fmt(constants.lambda) << '\n'
     << "a = " << fmt(constants.a) << '\n'
     << "lr_ae = " << fmt(lr_ae) << '\n'
     << "lr_disc = " << fmt(lr_disc) << '\n'
     << "beta1 = " << fmt(beta1) << '\n'
     << "beta2 = " << fmt(beta2) << '\n'
     << "seed = " << seed << '\n'
     << "checkpoint_interval = " << checkpoint_interval << '\n'
     << "dataset = " << dataset << '\n'
     << "backbone_seed = " << backbone_seed << '\n';
  return os.str();
}

void TrainConfig::validate() const {
  constants.validate();
  if (epochs < 1) throw ConfigError("epochs must be at least 1");
  if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
  if (!(lr_ae > 0.0) || !(lr_disc > 0.0)) throw ConfigError("learning rates must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
    throw ConfigError("Adam betas must be in [0, 1)");
  if (uses_anomalies(strategy) && anomalies_per_batch() == 0)
    throw ConfigError("strategy " + to_string(strategy) + " needs anomalies in every batch; batch_size " +
                      std::to_string(batch_size) + " with alpha " + fmt(constants.alpha) + " leaves none");
}

std::size_t TrainConfig::normals_per_batch() const {
  const auto n = static_cast<std::size_t>(std::ceil(constants.alpha * static_cast<double>(batch_size) - 1e-9));
  return std::clamp<std::size_t>(n, 1, batch_size);
}

std::size_t TrainConfig::anomalies_per_batch() const {
  return uses_anomalies(strategy) ? batch_size - normals_per_batch() : 0;
}

BackboneConfig backbone_config_for(const DatasetManifest& m, std::uint64_t seed) {
  BackboneConfig bc;
  bc.seed = seed;
  for (const auto& [k, v] : m.meta) {
    if (k == "image_size") bc.input_size = static_cast<std::size_t>(to_u64(k, v));
    if (k == "channels") bc.input_channels = static_cast<std::size_t>(to_u64(k, v));
  }
  bc.validate();
  return bc;
}

std::vector<FeaturePyramid> extract_entries(const DatasetManifest& m,
                                            const std::vector<const DatasetEntry*>& entries,
                                            const RandomBackbone& backbone) {
  constexpr std::size_t kChunk = 16;
  std::vector<FeaturePyramid> out;
  out.reserve(entries.size());
  for (std::size_t begin = 0; begin < entries.size(); begin += kChunk) {
    const std::size_t end = std::min(entries.size(), begin + kChunk);
    std::vector<double> values;
    Shape one;
    for (std::size_t i = begin; i < end; ++i) {
      const auto path = m.resolve(entries[i]->image);
      Tensor img = load_tensor(path);
      if (one.empty()) one = img.shape();
      if (img.shape() != one) throw FormatError("image " + path.string() + " has shape " + shape_str(img.shape()));
      values.insert(values.end(), img.data().begin(), img.data().end());
    }
    Shape batch_shape{end - begin};
    batch_shape.insert(batch_shape.end(), one.begin(), one.end());
    const auto feats = backbone.extract_batch(Tensor(batch_shape, std::move(values)));
    for (std::size_t i = 0; i < end - begin; ++i) out.push_back(unstack(feats, backbone.config().scales, i));
  }
  return out;
}

TrainFeatures extract_train_features(const DatasetManifest& m, const RandomBackbone& backbone) {
  TrainFeatures f;
  f.normal = extract_entries(m, m.select(Split::kTrain, Label::kNormal), backbone);
  f.anomalous = extract_entries(m, m.select(Split::kTrain, Label::kAnomalous), backbone);
  return f;
}

std::string log_header() { return "step,d_loss,g_loss,recon_plus\n"; }

std::string log_row(const StepRecord& r) {
  return std::to_string(r.step) + ',' + (r.d_loss ? fmt(*r.d_loss) : std::string()) + ',' + fmt(r.g_loss) + ',' +
         fmt(r.recon_plus) + '\n';
}

Trainer::Trainer(TrainConfig cfg, std::shared_ptr<const TrainFeatures> data)
    : cfg_(std::move(cfg)), data_(std::move(data)) {
  cfg_.validate();
  if (!data_ || data_->normal.empty()) throw ConfigError("training needs at least one normal image");
  if (uses_anomalies(cfg_.strategy) && data_->anomalous.empty())
    throw ConfigError("strategy " + to_string(cfg_.strategy) + " needs anomalous training images, dataset has none");
  std::vector<Shape> shapes;
  for (const auto& m : data_->normal[0].maps) shapes.push_back(m.shape());
  ae_ = std::make_unique<AutoEncoder>(shapes, derive_seed(cfg_.seed, "ae"));
  disc_ = std::make_unique<Discriminator>(shapes, derive_seed(cfg_.seed, "disc"));
  adam_ae_ = std::make_unique<Adam>(ae_->params(), AdamConfig{cfg_.lr_ae, cfg_.beta1, cfg_.beta2, 1e-8});
  adam_disc_ = std::make_unique<Adam>(disc_->params(), AdamConfig{cfg_.lr_disc, cfg_.beta1, cfg_.beta2, 1e-8});
  const std::size_t n_pos = cfg_.normals_per_batch();
  steps_per_epoch_ = (data_->normal.size() + n_pos - 1) / n_pos;
}

std::vector<std::size_t> Trainer::normal_perm(std::size_t epoch) const {
  std::vector<std::size_t> perm(data_->normal.size());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  std::mt19937_64 rng(derive_seed(cfg_.seed, "normal-perm", epoch));
  std::shuffle(perm.begin(), perm.end(), rng);
  return perm;
}

std::size_t Trainer::anomaly_at(std::size_t position) const {
  const std::size_t n = data_->anomalous.size();
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  std::mt19937_64 rng(derive_seed(cfg_.seed, "anomaly-perm", position / n));
  std::shuffle(perm.begin(), perm.end(), rng);
  return perm[position % n];
}

Batch Trainer::batch_for_step(std::size_t t) const {
  const std::size_t n_pos = cfg_.normals_per_batch(), n_neg = cfg_.anomalies_per_batch();
  const std::size_t epoch = t / steps_per_epoch_, within = t % steps_per_epoch_;
  const auto perm = normal_perm(epoch);
  std::vector<const FeaturePyramid*> normals, anomalies;
  for (std::size_t j = 0; j < n_pos; ++j) normals.push_back(&data_->normal[perm[(within * n_pos + j) % perm.size()]]);
  for (std::size_t j = 0; j < n_neg; ++j) anomalies.push_back(&data_->anomalous[anomaly_at(t * n_neg + j)]);
  Batch b;
  b.normal = stack_pyramids(normals);
  if (!anomalies.empty()) b.anomalous = stack_pyramids(anomalies);
  return b;
}

StepRecord Trainer::run_step() {
  const Batch batch = batch_for_step(step_);
  const Generated gen = generate(*ae_, batch);
  StepRecord rec;
  if (auto d_loss = disc_objective(cfg_.strategy, *disc_, batch, gen, cfg_.constants)) {
    disc_->params().zero_grad();
    backward(*d_loss);
    adam_disc_->step();
    rec.d_loss = d_loss->item();
  }
  // The generator objective is built after the D update so it sees the new D.
  Tensor g_loss = gen_objective(cfg_.strategy, *disc_, batch, gen, cfg_.constants);
  {
    NoGradGuard ng;
    rec.recon_plus = loss_recon_plus(batch, gen).item();
  }
  ae_->params().zero_grad();
  backward(g_loss);
  adam_ae_->step();
  rec.g_loss = g_loss.item();
  rec.step = ++step_;
  return rec;
}

void Trainer::save_checkpoint(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  ae_->params().save(dir, "ae_");
  disc_->params().save(dir, "disc_");
  adam_ae_->save(dir, "adam_ae_");
  adam_disc_->save(dir, "adam_disc_");
  std::vector<Shape> shapes = ae_->scale_shapes();
  std::ofstream st(dir / "state.txt", std::ios::trunc);
  if (!st) throw IoError("cannot write " + (dir / "state.txt").string());
  st << "step = " << step_ << '\n'
     << "strategy = " << to_string(cfg_.strategy) << '\n'
     << "scale_shapes = " << shapes_str(shapes) << '\n';
  std::ofstream cf(dir / "config.txt", std::ios::trunc);
  cf << cfg_.dump();
}

void Trainer::load_checkpoint(const std::filesystem::path& dir) {
  const auto kv = read_kv(dir / "state.txt");
  const auto it = kv.find("step");
  if (it == kv.end()) throw FormatError("checkpoint state in " + dir.string() + " has no step");
  if (auto sh = kv.find("scale_shapes"); sh != kv.end() && parse_shapes(sh->second) != ae_->scale_shapes())
    throw FormatError("checkpoint in " + dir.string() + " was trained on different feature shapes");
  ae_->params().load(dir, "ae_");
  disc_->params().load(dir, "disc_");
  adam_ae_->load(dir, "adam_ae_");
  adam_disc_->load(dir, "adam_disc_");
  step_ = static_cast<std::size_t>(to_u64("step", it->second));
}

TrainResult train(const TrainConfig& cfg, std::shared_ptr<const TrainFeatures> data,
                  const std::filesystem::path& out, const TrainOptions& opt) {
  Trainer trainer(cfg, std::move(data));
  std::filesystem::create_directories(out);
  TrainResult res;
  if (opt.resume) {
    trainer.load_checkpoint(out);
    res.log = read_log(out / "loss.csv", trainer.step());
    if (res.log.size() != trainer.step())
      throw FormatError("loss log in " + out.string() + " does not cover the checkpoint step");
  }
  std::size_t stop = trainer.total_steps();
  if (opt.stop_after) stop = std::min(stop, *opt.stop_after);
  while (trainer.step() < stop) {
    res.log.push_back(trainer.run_step());
    const auto& r = res.log.back();
    if (opt.verbose && (r.step % trainer.steps_per_epoch() == 0 || r.step == stop))
      std::cerr << "step " << r.step << "/" << trainer.total_steps() << " g_loss " << fmt(r.g_loss) << " recon "
                << fmt(r.recon_plus) << (r.d_loss ? " d_loss " + fmt(*r.d_loss) : std::string()) << '\n';
    if (cfg.checkpoint_interval && r.step % cfg.checkpoint_interval == 0 && r.step < stop) {
      trainer.save_checkpoint(out);
      write_log(out / "loss.csv", res.log);
    }
  }
  trainer.save_checkpoint(out);
  write_log(out / "loss.csv", res.log);
  res.steps = trainer.step();
  return res;
}

LoadedModel load_model(const std::filesystem::path& dir) {
  LoadedModel m;
  m.cfg = TrainConfig::load(dir / "config.txt");
  const auto kv = read_kv(dir / "state.txt");
  const auto sh = kv.find("scale_shapes");
  if (sh == kv.end()) throw FormatError("checkpoint state in " + dir.string() + " has no scale shapes");
  const auto shapes = parse_shapes(sh->second);
  m.ae = std::make_unique<AutoEncoder>(shapes, 0);
  m.disc = std::make_unique<Discriminator>(shapes, 0);
  m.ae->params().load(dir, "ae_");
  m.disc->params().load(dir, "disc_");
  m.step = static_cast<std::size_t>(to_u64("step", kv.at("step")));
  return m;
}

}  // namespace ckad
