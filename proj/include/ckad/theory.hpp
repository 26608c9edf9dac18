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
#include <random>
#include <string>
#include <vector>

// Exact solver for the finite-support alignment game: discriminator best
// responses, loss values and equilibrium checks by exhaustive enumeration.
namespace ckad::theory {

enum class GameMode { kImage, kPatch };

std::string to_string(GameMode m);

struct DiscreteGame {
  std::vector<double> p_plus;
  std::vector<double> p_minus;
  std::vector<double> p_g;
  double a = 1.0;
  double gamma = 0.5;
  double beta = 0.5;  // normal-patch share inside anomalous images (patch mode)
  GameMode mode = GameMode::kImage;

  std::size_t size() const { return p_plus.size(); }
  // Throws ConfigError on non-simplex vectors or out-of-range constants.
  void validate() const;
  bool disjoint() const;
  // Distribution of the real anomalous-side draws: P- (image) or
  // beta P+ + (1 - beta) P- (patch).
  std::vector<double> q() const;
  // gamma / (1 - beta + beta gamma) in patch mode, gamma in image mode.
  double eta() const;
};

inline constexpr double kSimplexTol = 1e-12;
inline constexpr std::size_t kMaxExhaustive = 12;

// L1 mass of p - q, in [0, 2].
double tv_l1(const std::vector<double>& p, const std::vector<double>& q);
// Half-L1 convention, in [0, 1].
double tv_half(const std::vector<double>& p, const std::vector<double>& q);

// f* in {-1, +1}^n minimising E_p f - E_q f: -1 where p > q, +1 elsewhere.
std::vector<double> hahn_witness(const std::vector<double>& p, const std::vector<double>& q);
double witness_value(const std::vector<double>& p, const std::vector<double>& q,
                     const std::vector<double>& f);

// Pointwise coefficient of D_i in L_D: p+_i - gamma p_g_i - (1 - gamma) q_i.
std::vector<double> d_coefficients(const DiscreteGame& g);
// D_i = a where the coefficient is negative, 0 otherwise (ties included).
std::vector<double> best_response_D(const DiscreteGame& g);

struct LossPair {
  double l_d = 0.0;
  double l_g = 0.0;
};
// Exact L_D / L_G for D in [0, a]^n.
LossPair loss_values(const DiscreteGame& g, const std::vector<double>& d);

struct ExhaustiveResult {
  std::vector<double> d;
  double l_d = 0.0;
  std::uint64_t index = 0;  // bit i set means D_i = a
};
// Minimum of L_D over all 2^n bang-bang discriminators; lowest index wins
// ties. n <= kMaxExhaustive.
ExhaustiveResult exhaustive_best_D(const DiscreteGame& g);

// Simplex points sum_i k_i / r e_i with at most `cap` entries, in
// lexicographic order of (k_0, k_1, ...).
std::vector<std::vector<double>> simplex_grid(std::size_t n, std::size_t resolution,
                                              std::size_t cap);

struct Check {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct NashReport {
  std::vector<Check> checks;
  double l_d_star = 0.0;
  double l_g_star = 0.0;
  double predicted = 0.0;     // a(1-gamma) or a(1-gamma)(1-beta)
  double closed_form = 0.0;   // a(1-gamma)/2 or gamma a (1-eta) / (2 eta)
  double eta = 0.0;

  bool all_pass() const;
};

inline constexpr double kValueTol = 1e-12;

// Checks, at p_g = p_plus: (i) the pointwise best response attains the
// exhaustive minimum of L_D, (ii) p_plus minimises L_G against D* over
// simplex vertices and a grid, (iii) the equilibrium value formula,
// (iv) the eta factorisation and the factor-2 relation to closed_form.
// Overlapping supports produce a failing premise check.
NashReport verify_nash(const DiscreteGame& g);

// Random game with disjoint supports of p_plus / p_minus and p_g = p_plus.
DiscreteGame random_disjoint_game(std::mt19937_64& rng, std::size_t n, double a, double gamma,
                                  double beta, GameMode mode);

// The fixed set checked by the `verify-theory` command.
std::vector<DiscreteGame> default_games(std::uint64_t seed);

struct TheoryRun {
  std::vector<NashReport> reports;
  std::string text;  // PASS/FAIL lines
  std::string csv;   // mode,n,a,gamma,beta,eta,l_d_star,l_g_star,predicted,closed_form
  bool all_pass() const;
};
TheoryRun run_theory(const std::vector<DiscreteGame>& games);

}  // namespace ckad::theory
