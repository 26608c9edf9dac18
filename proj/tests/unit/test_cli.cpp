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


#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <fstream>

#include "helpers.hpp"

namespace {

struct Run {
  int status = -1;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(CKAD_CLI_PATH) + " " + args + " 2>&1";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  const int st = pclose(p);
  r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

}  // namespace

TEST_CASE("usage errors exit with 2") {
  CHECK(run("").status == 2);
  CHECK(run("frobnicate").status == 2);
  CHECK(run("train --out x").status == 2);
  CHECK(run("score --k abc --model m --out o").status == 2);
}

TEST_CASE("verify-theory passes on the default games") {
  const auto dir = testutil::temp_dir("cli");
  Run r = run("verify-theory --out " + (dir / "vt").string());
  CHECK(r.status == 0);
  CHECK(r.out.find("FAIL") == std::string::npos);
  CHECK(r.out.find("PASS") != std::string::npos);
  CHECK(std::filesystem::exists(dir / "vt" / "games.csv"));
  CHECK(std::filesystem::exists(dir / "vt" / "report.txt"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("grad-check passes") {
  Run r = run("grad-check");
  CHECK(r.status == 0);
  CHECK(r.out.find("FAIL") == std::string::npos);
  CHECK(r.out.find("max_rel_err") != std::string::npos);
}

TEST_CASE("missing manifest exits with 1 and names the path") {
  const auto dir = testutil::temp_dir("cli");
  std::ofstream(dir / "cfg.txt") << "strategy = Recon\nepochs = 1\ndataset = " << (dir / "nowhere" / "manifest.tsv").string()
                                 << "\n";
  Run r = run("train --config " + (dir / "cfg.txt").string() + " --out " + (dir / "m").string());
  CHECK(r.status == 1);
  CHECK(r.out.find((dir / "nowhere").string()) != std::string::npos);
  Run bad = run("train --config " + (dir / "absent.txt").string() + " --out " + (dir / "m").string());
  CHECK(bad.status == 1);
  std::filesystem::remove_all(dir);
}

TEST_CASE("small pipeline end to end") {
  const auto dir = testutil::temp_dir("cli");
  std::ofstream(dir / "gen.txt") << "train_normal = 8\nrl = 0.25\ntest_normal = 3\ntest_anomalous = 3\n";
  std::ofstream(dir / "train.txt") << "strategy = CKAPatch\nepochs = 1\nbatch_size = 4\n";
  const std::string d = dir.string();
  REQUIRE(run("gen-data --config " + d + "/gen.txt --out " + d + "/data").status == 0);
  REQUIRE(run("train --config " + d + "/train.txt --dataset " + d + "/data --out " + d + "/model").status == 0);
  REQUIRE(run("score --model " + d + "/model --out " + d + "/scores").status == 0);
  Run e = run("eval --scores " + d + "/scores --out " + d + "/eval");
  REQUIRE(e.status == 0);
  CHECK(std::filesystem::exists(dir / "model" / "loss.csv"));
  CHECK(std::filesystem::exists(dir / "scores" / "scores.csv"));
  CHECK(std::filesystem::exists(dir / "eval" / "metrics.csv"));
  CHECK(std::filesystem::exists(dir / "eval" / "histogram.csv"));
  CHECK(run("train --config " + d + "/train.txt --strategy Nope --dataset " + d + "/data --out " + d + "/m2").status == 1);
  std::filesystem::remove_all(dir);
}
