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

#include "ckad/adam.hpp"

#include <cmath>
#include <fstream>

#include "ckad/error.hpp"
#include "ckad/tensor_file.hpp"

namespace ckad {

Adam::Adam(ParamStore& params, AdamConfig cfg) : params_(&params), cfg_(cfg) {
  for (const auto& e : params.entries()) {
    m_.emplace_back(e.second.numel(), 0.0);
    v_.emplace_back(e.second.numel(), 0.0);
  }
}

void Adam::step() {
  auto& entries = params_->entries();
  if (entries.size() != m_.size()) throw UsageError("Adam: parameter set changed after construction");
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < entries.size(); ++i) {
    Tensor& p = entries[i].second;
    auto g = p.grad_view();
    auto w = p.mutable_data();
    auto& m = m_[i];
    auto& v = v_[i];
    for (std::size_t j = 0; j < w.size(); ++j) {
      const double gj = g.empty() ? 0.0 : g[j];
      m[j] = cfg_.beta1 * m[j] + (1.0 - cfg_.beta1) * gj;
      v[j] = cfg_.beta2 * v[j] + (1.0 - cfg_.beta2) * gj * gj;
      const double mhat = m[j] / bc1;
      const double vhat = v[j] / bc2;
      w[j] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
    }
  }
}

void Adam::save(const std::filesystem::path& dir, const std::string& prefix) const {
  std::filesystem::create_directories(dir);
  const auto& entries = params_->entries();
  ParamStore moments;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    moments.add(entries[i].first + ".m", Tensor(entries[i].second.shape(), m_[i]));
    moments.add(entries[i].first + ".v", Tensor(entries[i].second.shape(), v_[i]));
  }
  moments.save(dir, prefix);
  std::ofstream os(dir / (prefix + "step.txt"), std::ios::trunc);
  os << t_ << '\n';
  if (!os) throw IoError("cannot write optimizer step in " + dir.string());
}

void Adam::load(const std::filesystem::path& dir, const std::string& prefix) {
  const auto& entries = params_->entries();
  ParamStore moments;
  for (const auto& e : entries) {
    moments.add(e.first + ".m", Tensor(e.second.shape()));
    moments.add(e.first + ".v", Tensor(e.second.shape()));
  }
  moments.load(dir, prefix);
  for (std::size_t i = 0; i < entries.size(); ++i) {
    auto m = moments.entries()[2 * i].second.data();
    auto v = moments.entries()[2 * i + 1].second.data();
    m_[i].assign(m.begin(), m.end());
    v_[i].assign(v.begin(), v.end());
  }
  std::ifstream is(dir / (prefix + "step.txt"));
  if (!(is >> t_)) throw FormatError("missing optimizer step counter in " + dir.string());
}

}  // namespace ckad
