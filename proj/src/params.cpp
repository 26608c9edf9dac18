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

#include "ckad/params.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>

#include "ckad/error.hpp"
#include "ckad/tensor_file.hpp"

namespace ckad {

Tensor& ParamStore::add(const std::string& name, Tensor value) {
  if (contains(name)) throw ConfigError("duplicate parameter name " + name);
  value.set_requires_grad(true);
  entries_.emplace_back(name, std::move(value));
  return entries_.back().second;
}

const Tensor& ParamStore::get(const std::string& name) const {
  for (const auto& [n, t] : entries_)
    if (n == name) return t;
  throw ConfigError("unknown parameter " + name);
}

bool ParamStore::contains(const std::string& name) const {
  for (const auto& e : entries_)
    if (e.first == name) return true;
  return false;
}

void ParamStore::zero_grad() {
  for (auto& e : entries_) e.second.zero_grad();
}

double ParamStore::grad_sq_norm() const {
  double s = 0.0;
  for (const auto& e : entries_)
    for (double g : e.second.grad_view()) s += g * g;
  return s;
}

std::size_t ParamStore::numel() const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.second.numel();
  return n;
}

std::uint64_t ParamStore::checksum() const {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](const void* p, std::size_t len) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < len; ++i) {
      h ^= b[i];
      h *= 1099511628211ull;
    }
  };
  for (const auto& [name, t] : entries_) {
    mix(name.data(), name.size());
    mix(t.data().data(), t.numel() * sizeof(double));
  }
  return h;
}

static std::string file_name_for(const std::string& name) {
  std::string f = name;
  for (char& c : f)
    if (c == '/' || c == '\\') c = '_';
  return f + ".ckt";
}

void ParamStore::save(const std::filesystem::path& dir, const std::string& prefix) const {
  std::filesystem::create_directories(dir);
  std::ofstream manifest(dir / (prefix + "manifest.txt"), std::ios::trunc);
  if (!manifest) throw IoError("cannot write manifest in " + dir.string());
  for (const auto& [name, t] : entries_) {
    const std::string rel = prefix + file_name_for(name);
    save_tensor(dir / rel, t);
    manifest << name << '\t' << rel << '\t' << shape_str(t.shape()) << '\n';
  }
}

void ParamStore::load(const std::filesystem::path& dir, const std::string& prefix) {
  const auto mpath = dir / (prefix + "manifest.txt");
  std::ifstream manifest(mpath);
  if (!manifest) throw FormatError("missing checkpoint manifest " + mpath.string());
  std::vector<std::pair<std::string, std::string>> lines;  // name, rel
  std::string line;
  while (std::getline(manifest, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string name, rel, shape;
    if (!std::getline(ls, name, '\t') || !std::getline(ls, rel, '\t') || !std::getline(ls, shape))
      throw FormatError(mpath.string() + ": malformed line '" + line + "'");
    lines.emplace_back(name, rel);
  }
  if (lines.size() != entries_.size())
    throw FormatError(mpath.string() + ": expected " + std::to_string(entries_.size()) +
                      " parameters, found " + std::to_string(lines.size()));
  for (std::size_t i = 0; i < lines.size(); ++i) {
    auto& [name, t] = entries_[i];
    if (lines[i].first != name)
      throw FormatError(mpath.string() + ": expected parameter " + name + ", found " + lines[i].first);
    Tensor loaded = load_tensor(dir / lines[i].second);
    if (loaded.shape() != t.shape())
      throw FormatError((dir / lines[i].second).string() + ": shape " + shape_str(loaded.shape()) +
                        " does not match " + name + " " + shape_str(t.shape()));
    auto dst = t.mutable_data();
    std::copy(loaded.data().begin(), loaded.data().end(), dst.begin());
  }
}

Tensor he_normal(Shape shape, std::size_t fan_in, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, std::sqrt(2.0 / static_cast<double>(fan_in)));
  std::vector<double> v(shape_numel(shape));
  for (auto& x : v) x = nd(rng);
  return Tensor(std::move(shape), std::move(v));
}

}  // namespace ckad
