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

#include "ckad/theory.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "ckad/error.hpp"

namespace ckad::theory {
namespace {

void check_simplex(const std::vector<double>& p, const char* name) {
  double s = 0.0;
  for (double v : p) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError(std::string(name) + " has a negative or non-finite entry");
    s += v;
  }
  if (std::abs(s - 1.0) > kSimplexTol) throw ConfigError(std::string(name) + " does not sum to 1");
}

void check_pair(const std::vector<double>& p, const std::vector<double>& q) {
  if (p.size() != q.size() || p.empty()) throw ConfigError("distributions must have the same non-zero length");
  check_simplex(p, "p");
  check_simplex(q, "q");
}

double dot(const std::vector<double>& x, const std::vector<double>& y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string to_string(GameMode m) { return m == GameMode::kImage ? "image" : "patch"; }

void DiscreteGame::validate() const {
  if (p_plus.empty()) throw ConfigError("game support is empty");
  if (p_minus.size() != p_plus.size() || p_g.size() != p_plus.size())
    throw ConfigError("game vectors differ in length");
  check_simplex(p_plus, "p_plus");
  check_simplex(p_minus, "p_minus");
  check_simplex(p_g, "p_g");
  if (!(a > 0.0)) throw ConfigError("a must be positive");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("gamma must be in (0, 1]");
  if (mode == GameMode::kPatch && !(beta > 0.0 && beta < 1.0))
    throw ConfigError("beta must be in (0, 1)");
}

bool DiscreteGame::disjoint() const {
  for (std::size_t i = 0; i < size(); ++i)
    if (p_plus[i] > 0.0 && p_minus[i] > 0.0) return false;
  return true;
}

std::vector<double> DiscreteGame::q() const {
  if (mode == GameMode::kImage) return p_minus;
  std::vector<double> out(size());
  for (std::size_t i = 0; i < size(); ++i) out[i] = beta * p_plus[i] + (1.0 - beta) * p_minus[i];
  return out;
}

double DiscreteGame::eta() const {
  if (mode == GameMode::kImage) return gamma;
  return gamma / (1.0 - beta + beta * gamma);
}

double tv_l1(const std::vector<double>& p, const std::vector<double>& q) {
  check_pair(p, q);
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
  return s;
}

double tv_half(const std::vector<double>& p, const std::vector<double>& q) { return 0.5 * tv_l1(p, q); }

std::vector<double> hahn_witness(const std::vector<double>& p, const std::vector<double>& q) {
  check_pair(p, q);
  std::vector<double> f(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) f[i] = p[i] - q[i] > 0.0 ? -1.0 : 1.0;
  return f;
}

double witness_value(const std::vector<double>& p, const std::vector<double>& q,
                     const std::vector<double>& f) {
  return dot(p, f) - dot(q, f);
}

std::vector<double> d_coefficients(const DiscreteGame& g) {
  const auto q = g.q();
  std::vector<double> c(g.size());
  for (std::size_t i = 0; i < g.size(); ++i)
    c[i] = g.p_plus[i] - g.gamma * g.p_g[i] - (1.0 - g.gamma) * q[i];
  return c;
}

std::vector<double> best_response_D(const DiscreteGame& g) {
  g.validate();
  const auto c = d_coefficients(g);
  std::vector<double> d(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) d[i] = c[i] < 0.0 ? g.a : 0.0;
  return d;
}

LossPair loss_values(const DiscreteGame& g, const std::vector<double>& d) {
  if (d.size() != g.size()) throw ConfigError("discriminator length differs from the support");
  for (double v : d)
    if (!(v >= 0.0 && v <= g.a)) throw ConfigError("discriminator values must lie in [0, a]");
  const auto q = g.q();
  LossPair out;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double h = std::max(0.0, g.a - d[i]);
    out.l_d += g.p_plus[i] * d[i] + g.gamma * g.p_g[i] * h + (1.0 - g.gamma) * q[i] * h;
    out.l_g += g.gamma * g.p_g[i] * d[i] + (1.0 - g.gamma) * q[i] * d[i] - g.p_plus[i] * d[i];
  }
  return out;
}

ExhaustiveResult exhaustive_best_D(const DiscreteGame& g) {
  g.validate();
  const std::size_t n = g.size();
  if (n > kMaxExhaustive) throw ConfigError("exhaustive search is limited to 12 support points");
  ExhaustiveResult best;
  std::vector<double> d(n);
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    for (std::size_t i = 0; i < n; ++i) d[i] = (mask >> i) & 1 ? g.a : 0.0;
    const double l = loss_values(g, d).l_d;
    if (mask == 0 || l < best.l_d) {
      best.l_d = l;
      best.d = d;
      best.index = mask;
    }
  }
  return best;
}

std::vector<std::vector<double>> simplex_grid(std::size_t n, std::size_t resolution,
                                              std::size_t cap) {
  std::vector<std::vector<double>> out;
  std::vector<std::size_t> k(n, 0);
  // Depth-first over compositions of `resolution` into n parts.
  auto rec = [&](auto&& self, std::size_t i, std::size_t left) -> void {
    if (out.size() >= cap) return;
    if (i + 1 == n) {
      k[i] = left;
      std::vector<double> p(n);
      for (std::size_t j = 0; j < n; ++j) p[j] = static_cast<double>(k[j]) / static_cast<double>(resolution);
      out.push_back(std::move(p));
      return;
    }
    for (std::size_t v = 0; v <= left; ++v) {
      k[i] = v;
      self(self, i + 1, left - v);
    }
  };
  if (n > 0 && resolution > 0) rec(rec, 0, resolution);
  return out;
}

bool NashReport::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

NashReport verify_nash(const DiscreteGame& g) {
  g.validate();
  NashReport r;
  r.eta = g.eta();
  const bool premise = g.disjoint() && g.p_g == g.p_plus;
  r.checks.push_back({"premise", premise,
                      premise ? "disjoint supports, p_g = p_plus" : "supports overlap or p_g != p_plus"});

  // (i)
  const auto d_star = best_response_D(g);
  const auto at_star = loss_values(g, d_star);
  r.l_d_star = at_star.l_d;
  r.l_g_star = at_star.l_g;
  if (g.size() <= kMaxExhaustive) {
    const auto ex = exhaustive_best_D(g);
    const bool ok = at_star.l_d <= ex.l_d + kValueTol;
    r.checks.push_back({"best_response_global_min", ok,
                        "L_D(D*)=" + fmt(at_star.l_d) + " exhaustive=" + fmt(ex.l_d)});
  } else {
    r.checks.push_back({"best_response_global_min", false, "support too large for exhaustive search"});
  }

  // (ii) L_G is affine in p_g, so vertices bound every mixture; the grid
  // is a direct confirmation.
  {
    DiscreteGame h = g;
    double worst_gap = 0.0;
    auto probe = [&](const std::vector<double>& p) {
      h.p_g = p;
      worst_gap = std::min(worst_gap, loss_values(h, d_star).l_g - at_star.l_g);
    };
    for (std::size_t i = 0; i < g.size(); ++i) {
      std::vector<double> e(g.size(), 0.0);
      e[i] = 1.0;
      probe(e);
    }
    for (const auto& p : simplex_grid(g.size(), 6, 5000)) probe(p);
    const bool ok = worst_gap >= -kValueTol;
    r.checks.push_back({"p_plus_minimises_generator", ok, "min L_G(p) - L_G(p_plus)=" + fmt(worst_gap)});
  }

  // (iii)
  r.predicted = g.a * (1.0 - g.gamma) * (g.mode == GameMode::kPatch ? 1.0 - g.beta : 1.0);
  r.checks.push_back({"equilibrium_value", std::abs(r.l_g_star - r.predicted) <= kValueTol,
                      "L_G*=" + fmt(r.l_g_star) + " predicted=" + fmt(r.predicted)});

  // (iv) L_D coefficients factor as (gamma/eta)(p+ - eta p_g - (1-eta) p-);
  // L_D* = a - gamma a / (2 eta) * tv_l1(p+, P'_m); closed form is half L_G*.
  {
    const double eta = r.eta;
    const auto c = d_coefficients(g);
    double fact_err = 0.0;
    std::vector<double> mixed(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      mixed[i] = eta * g.p_g[i] + (1.0 - eta) * g.p_minus[i];
      fact_err = std::max(fact_err, std::abs(c[i] - g.gamma / eta * (g.p_plus[i] - mixed[i])));
    }
    const double ld_tv = g.a - g.gamma * g.a / (2.0 * eta) * tv_l1(g.p_plus, mixed);
    r.closed_form = g.mode == GameMode::kImage ? g.a * (1.0 - g.gamma) / 2.0
                                               : g.gamma * g.a * (1.0 - eta) / (2.0 * eta);
    const bool ok = fact_err <= kValueTol && std::abs(ld_tv - r.l_d_star) <= kValueTol &&
                    std::abs(2.0 * r.closed_form - r.l_g_star) <= kValueTol;
    r.checks.push_back({"eta_and_factor_two", ok,
                        "eta=" + fmt(eta) + " closed_form=" + fmt(r.closed_form) +
                            " 2*closed_form=" + fmt(2.0 * r.closed_form)});
  }
  return r;
}

DiscreteGame random_disjoint_game(std::mt19937_64& rng, std::size_t n, double a, double gamma,
                                  double beta, GameMode mode) {
  if (n < 2) throw ConfigError("a disjoint game needs at least two support points");
  std::uniform_int_distribution<std::size_t> split(1, n - 1);
  std::uniform_real_distribution<double> unit(0.05, 1.0);
  const std::size_t k = split(rng);
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  DiscreteGame g;
  g.p_plus.assign(n, 0.0);
  g.p_minus.assign(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) (j < k ? g.p_plus : g.p_minus)[order[j]] = unit(rng);
  for (auto* p : {&g.p_plus, &g.p_minus}) {
    double s = 0.0;
    for (double v : *p) s += v;
    for (auto& v : *p) v /= s;
  }
  g.p_g = g.p_plus;
  g.a = a;
  g.gamma = gamma;
  g.beta = beta;
  g.mode = mode;
  return g;
}

std::vector<DiscreteGame> default_games(std::uint64_t seed) {
  std::vector<DiscreteGame> games;
  DiscreteGame base;
  base.p_plus = {0.5, 0.5, 0.0, 0.0};
  base.p_minus = {0.0, 0.0, 0.25, 0.75};
  base.p_g = base.p_plus;
  games.push_back(base);
  base.mode = GameMode::kPatch;
  games.push_back(base);
  base.gamma = 1.0;
  games.push_back(base);
  std::mt19937_64 rng(seed);
  const double as[] = {0.5, 1.0, 2.0};
  const double gammas[] = {0.3, 0.5, 1.0};
  const double betas[] = {0.2, 0.5, 0.8};
  std::uniform_int_distribution<std::size_t> size(2, kMaxExhaustive);
  for (double a : as)
    for (double gamma : gammas)
      for (double beta : betas)
        for (auto mode : {GameMode::kImage, GameMode::kPatch})
          games.push_back(random_disjoint_game(rng, size(rng), a, gamma, beta, mode));
  return games;
}

bool TheoryRun::all_pass() const {
  return std::all_of(reports.begin(), reports.end(), [](const NashReport& r) { return r.all_pass(); });
}

TheoryRun run_theory(const std::vector<DiscreteGame>& games) {
  TheoryRun run;
  std::ostringstream text, csv;
  csv << "game,mode,n,a,gamma,beta,eta,l_d_star,l_g_star,predicted,closed_form\n";
  for (std::size_t i = 0; i < games.size(); ++i) {
    const auto& g = games[i];
    auto rep = verify_nash(g);
    for (const auto& c : rep.checks)
      text << (c.pass ? "PASS" : "FAIL") << " game " << i << ' ' << to_string(g.mode) << ' ' << c.name << ": "
           << c.detail << '\n';
    csv << i << ',' << to_string(g.mode) << ',' << g.size() << ',' << fmt(g.a) << ',' << fmt(g.gamma) << ','
        << fmt(g.beta) << ',' << fmt(rep.eta) << ',' << fmt(rep.l_d_star) << ',' << fmt(rep.l_g_star) << ','
        << fmt(rep.predicted) << ',' << fmt(rep.closed_form) << '\n';
    run.reports.push_back(std::move(rep));
  }
  run.text = text.str();
  run.csv = csv.str();
  return run;
}

}  // namespace ckad::theory
