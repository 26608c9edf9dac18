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

#include "ckad/dataset.hpp"

#include <fstream>
#include <sstream>

#include "ckad/error.hpp"

namespace ckad {

std::string to_string(Split s) { return s == Split::kTrain ? "train" : "test"; }
std::string to_string(Label l) { return l == Label::kNormal ? "normal" : "anomalous"; }

DatasetManifest DatasetManifest::load(const std::filesystem::path& file) {
  std::ifstream is(file);
  if (!is) throw IoError("cannot open dataset manifest " + file.string());
  DatasetManifest m;
  m.root = file.parent_path();
  std::string line;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& why) {
    throw FormatError(file.string() + ":" + std::to_string(lineno) + ": " + why);
  };
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t#");
        const auto e = s.find_last_not_of(" \t");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
      };
      m.meta.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
      continue;
    }
    std::vector<std::string> f;
    std::istringstream ls(line);
    std::string tok;
    while (std::getline(ls, tok, '\t')) f.push_back(tok);
    if (f.size() != 4) fail("expected 4 tab-separated fields");
    DatasetEntry e;
    if (f[0] == "train") e.split = Split::kTrain;
    else if (f[0] == "test") e.split = Split::kTest;
    else fail("unknown split '" + f[0] + "'");
    if (f[1] == "normal") e.label = Label::kNormal;
    else if (f[1] == "anomalous") e.label = Label::kAnomalous;
    else fail("unknown label '" + f[1] + "'");
    if (f[2].empty()) fail("empty image path");
    e.image = f[2];
    if (f[3] != "-") e.mask = f[3];
    m.entries.push_back(std::move(e));
  }
  m.validate();
  return m;
}

void DatasetManifest::save(const std::filesystem::path& file) const {
  std::ofstream os(file, std::ios::trunc);
  if (!os) throw IoError("cannot write dataset manifest " + file.string());
  for (const auto& [k, v] : meta) os << "# " << k << " = " << v << '\n';
  for (const auto& e : entries)
    os << to_string(e.split) << '\t' << to_string(e.label) << '\t' << e.image << '\t'
       << (e.mask ? *e.mask : std::string("-")) << '\n';
  if (!os) throw IoError("write failed: " + file.string());
}

void DatasetManifest::validate() const {
  for (const auto& e : entries)
    if (e.split == Split::kTest && e.label == Label::kAnomalous && !e.mask)
      throw FormatError("anomalous test image " + e.image + " has no mask");
}

std::vector<const DatasetEntry*> DatasetManifest::select(Split split, std::optional<Label> label) const {
  std::vector<const DatasetEntry*> out;
  for (const auto& e : entries)
    if (e.split == split && (!label || e.label == *label)) out.push_back(&e);
  return out;
}

}  // namespace ckad
