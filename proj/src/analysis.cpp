/**
 * Copyright 2026 The thzfl Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "thzfl/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "json.hpp"

namespace thzfl::analysis {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double Sq(double x) { return x * x; }

Inequality Make(std::string name, double lhs, double rhs, bool in_feasibility = true) {
  Inequality q;
  q.name = std::move(name);
  q.lhs = lhs;
  q.rhs = rhs;
  q.satisfied = std::isfinite(lhs) && lhs <= rhs;
  q.slack = (rhs > 0.0 && std::isfinite(lhs)) ? lhs / rhs : kInf;
  q.in_feasibility = in_feasibility;
  return q;
}

// JSON has no infinity; emit null and let readers treat it as divergent.
nlohmann::json Num(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

}  // namespace

void AnalysisConstants::Validate() const {
  const double all[] = {a1, a2, a3, c0, c1, c2, c3, L};
  for (double v : all)
    if (!(v > 0.0) || !std::isfinite(v)) ThrowInvalid("analysis constants a1..a3, c0..c3 and L must be positive");
  if (!(G >= 0.0) || !(sigma_sgd >= 0.0) || !(f_gap >= 0.0)) ThrowInvalid("G, sigma_sgd and f_gap must be non-negative");
}

double LocalEnergyBound(double grad_norm_sq, const AnalysisConstants &c, double lr_local,
                        std::size_t K) {
  if (grad_norm_sq < 0.0 || lr_local < 0.0) ThrowInvalid("local energy bound inputs must be non-negative");
  const double k = static_cast<double>(K);
  const double e2 = lr_local * lr_local;
  return c.a1 * e2 * k * k * grad_norm_sq + c.a2 * e2 * k * Sq(c.sigma_sgd) +
         c.a3 * e2 * k * k * Sq(c.G);
}

void PenaltyInputs::Validate() const {
  const std::size_t n = mean_gain.size();
  if (additive_var.size() != n || mult_var.size() != n) ThrowInvalid("penalty inputs must have one entry per subcarrier");
  if (!omega.empty() && omega.size() != n) ThrowInvalid("omega must be empty or per subcarrier");
  if (!excluded.empty() && excluded.size() != n) ThrowInvalid("excluded mask must be empty or per subcarrier");
}

PenaltyInputs PenaltyInputs::FromLinks(std::span<const channel::LinkStatistics> links,
                                       std::span<const double> omega, double kappa,
                                       std::size_t d_sub) {
  if (links.empty()) ThrowInvalid("no links to summarize");
  const std::size_t n = links.front().size();
  for (const auto &l : links)
    if (l.size() != n) ThrowInvalid("links disagree on subcarrier count");
  if (kappa <= 0.0) kappa = static_cast<double>(d_sub);
  double ref = 0.0;
  for (const auto &l : links)
    for (double g : l.mean_gains) ref = std::max(ref, g);
  if (ref <= 0.0) ref = 1.0;

  PenaltyInputs in;
  in.additive_var.resize(n);
  in.mean_gain.resize(n);
  in.mult_var.resize(n);
  in.omega.assign(omega.begin(), omega.end());
  const double m = static_cast<double>(links.size());
  for (std::size_t k = 0; k < n; ++k) {
    double g = 0.0, nv = 0.0, h = 0.0;
    for (const auto &l : links) {
      g += l.mean_gains[k] / ref;
      nv += l.noise_vars[k];
      h += l.jitter_vars[k];
    }
    g /= m;
    in.mean_gain[k] = g;
    in.mult_var[k] = h / m;
    // Zero gain with infinite noise: keep the ratio infinite rather than 0 * inf.
    in.additive_var[k] = g > 0.0 ? g * g * (static_cast<double>(d_sub) / kappa) * (nv / m) : nv / m;
  }
  return in;
}

Penalty ThzPenalty(const PenaltyInputs &in, const AnalysisConstants &c, double lr_local,
                   std::size_t K, std::size_t m) {
  if (m < 1) ThrowInvalid("penalty needs m >= 1");
  in.Validate();
  Penalty p;
  const std::size_t n = in.size();
  double add = 0.0;
  double mult = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    mult += in.mult_var[k] + (in.omega.empty() ? 0.0 : in.omega[k]);
    if (!in.excluded.empty() && in.excluded[k]) {
      ++p.excluded_count;
      continue;
    }
    if (in.additive_var[k] == 0.0) continue;
    if (in.mean_gain[k] == 0.0 || !std::isfinite(in.additive_var[k])) {
      p.divergent = true;
      continue;
    }
    add += in.additive_var[k] / Sq(in.mean_gain[k]);
  }
  const double mean_mult = n ? mult / static_cast<double>(n) : 0.0;
  const double k = static_cast<double>(K);
  const double e2 = lr_local * lr_local;
  const double drift = c.a2 * e2 * k * Sq(c.sigma_sgd) + c.a3 * e2 * k * k * Sq(c.G);
  const double inv_m = 1.0 / static_cast<double>(m);
  p.additive = p.divergent ? kInf : inv_m * add;
  p.multiplicative = inv_m * mean_mult * drift;
  p.value = p.additive + p.multiplicative;
  return p;
}

double CommVarianceBound(double update_energy, std::span<const double> mult_var,
                         std::span<const double> omega, std::span<const double> additive,
                         double d_bar) {
  if (!(d_bar >= 0.0 && d_bar <= 1.0)) ThrowInvalid("d_bar must lie in [0, 1]");
  const std::size_t n = mult_var.size();
  if (n == 0 || additive.size() != n || (!omega.empty() && omega.size() != n))
    ThrowInvalid("bound inputs must have one entry per subcarrier");
  const double e = update_energy / static_cast<double>(n);
  double s = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double w = omega.empty() ? 0.0 : omega[k];
    s += Sq(1.0 - d_bar) * e + d_bar * ((mult_var[k] + w) * e + additive[k]);
  }
  return s;
}

HarmonicMean HarmonicMeanSnr(std::span<const double> snr) {
  if (snr.empty()) ThrowInvalid("harmonic mean of an empty vector");
  HarmonicMean h;
  double inv = 0.0;
  for (double v : snr) {
    if (v < 0.0) ThrowInvalid("SNR must be non-negative");
    if (v == 0.0) {
      h.collapse = true;
      return h;
    }
    inv += 1.0 / v;
  }
  h.value = static_cast<double>(snr.size()) / inv;
  return h;
}

double BiasFloor(std::span<const double> client_weights, double G) {
  if (client_weights.empty()) return 0.0;
  const double u = 1.0 / static_cast<double>(client_weights.size());
  double s = 0.0;
  for (double a : client_weights) s += Sq(a - u);
  return s * G * G;
}

std::optional<unsigned> QuantizationBudget(double mean_mult_var, const AnalysisConstants &c,
                                           double lr_local, std::size_t K, std::size_t m,
                                           std::size_t d_sub) {
  const double k = static_cast<double>(K);
  const double rhs =
      static_cast<double>(m) / (4.0 * c.L * c.a1 * lr_local * lr_local * k * k) - mean_mult_var;
  if (!(rhs > 0.0)) return std::nullopt;
  for (unsigned b = 1; b <= 60; ++b)
    if (std::ldexp(static_cast<double>(d_sub), -2 * static_cast<int>(b)) <= rhs) return b;
  return std::nullopt;
}

void Schedule::Validate() const {
  if (T < 1 || K < 1 || m < 1 || d_sub < 1) ThrowInvalid("schedule T, K, m and d_sub must be >= 1");
  if (!(eta > 0.0) || !(eta_loc > 0.0) || !(epsilon > 0.0)) ThrowInvalid("schedule step sizes and epsilon must be positive");
}

DesignReport CheckDesign(const PenaltyInputs &in, const AnalysisConstants &c, const Schedule &s) {
  c.Validate();
  s.Validate();
  DesignReport r;
  r.assumed_constants = c.assumed;
  const double T = static_cast<double>(s.T);
  const double K = static_cast<double>(s.K);
  const double m = static_cast<double>(s.m);
  const double sqT = std::sqrt(T);
  const double alpha = s.eta * sqT;
  const double beta = s.eta_loc * std::sqrt(K);
  r.C_opt = 2.0 * c.f_gap / (alpha * beta * c.c0 * std::sqrt(K));
  r.C_sgd = c.c1 * alpha * c.L / m;
  r.C_thz = c.c2 * alpha * c.L;
  r.C_het = c.c3 * alpha * alpha * c.L * c.L * K;
  r.penalty = ThzPenalty(in, c, s.eta_loc, s.K, s.m);

  double mean_mult = 0.0;
  for (std::size_t k = 0; k < in.size(); ++k)
    mean_mult += in.mult_var[k] + (in.omega.empty() ? 0.0 : in.omega[k]);
  if (in.size()) mean_mult /= static_cast<double>(in.size());
  const double e2 = s.eta_loc * s.eta_loc;
  const double eps = s.epsilon;

  r.inequalities.push_back(Make("total_snr", r.penalty.additive, eps * sqT / (4.0 * r.C_thz)));
  r.inequalities.push_back(Make("average_stability", r.penalty.multiplicative, eps * sqT / (8.0 * r.C_thz)));
  r.inequalities.push_back(Make("absorbability", mean_mult * c.a1 * e2 * K * K / m, 1.0 / (4.0 * c.L)));
  r.inequalities.push_back(Make("fl_optimization", r.C_opt / sqT, eps / 4.0));
  r.inequalities.push_back(Make("fl_sgd_noise", r.C_sgd * c.sigma_sgd * c.sigma_sgd / sqT, eps / 4.0));
  r.inequalities.push_back(Make("fl_heterogeneity", r.C_het * c.G * c.G / T, eps / 4.0));

  // Closed form of total_snr: sum_n 1/snr_n against (m eps / 4 C_thz)(kappa / d_sub) sqrt(T).
  const double kappa = s.kappa > 0.0 ? s.kappa : static_cast<double>(s.d_sub);
  const double ratio = kappa / static_cast<double>(s.d_sub);
  const double closed_lhs = r.penalty.additive * m * ratio;
  r.inequalities.push_back(
      Make("closed_form_snr", closed_lhs, m * eps / (4.0 * r.C_thz) * ratio * sqT, false));

  r.feasible = std::all_of(r.inequalities.begin(), r.inequalities.end(),
                           [](const Inequality &q) { return !q.in_feasibility || q.satisfied; });
  return r;
}

std::string DesignReport::ToText() const {
  std::ostringstream os;
  char buf[256];
  os << "design check: " << (feasible ? "FEASIBLE" : "INFEASIBLE") << "\n";
  std::snprintf(buf, sizeof buf, "  C_opt=%.6g C_sgd=%.6g C_thz=%.6g C_het=%.6g\n", C_opt, C_sgd, C_thz, C_het);
  os << buf;
  std::snprintf(buf, sizeof buf, "  penalty=%.6g (additive=%.6g, multiplicative=%.6g, excluded=%zu%s)\n",
                penalty.value, penalty.additive, penalty.multiplicative, penalty.excluded_count,
                penalty.divergent ? ", DIVERGENT" : "");
  os << buf;
  for (const auto &q : inequalities) {
    std::snprintf(buf, sizeof buf, "  %-18s lhs=%-12.6g rhs=%-12.6g slack=%-10.4g %s%s\n", q.name.c_str(),
                  q.lhs, q.rhs, q.slack, q.satisfied ? "ok" : "VIOLATED",
                  q.in_feasibility ? "" : " (diagnostic)");
    os << buf;
  }
  if (!assumed_constants.empty()) {
    os << "  assumed defaults:";
    for (const auto &a : assumed_constants) os << ' ' << a;
    os << "\n";
  }
  return os.str();
}

std::string DesignReport::ToJson(int indent) const {
  nlohmann::ordered_json j;
  j["feasible"] = feasible;
  j["C_opt"] = Num(C_opt);
  j["C_sgd"] = Num(C_sgd);
  j["C_thz"] = Num(C_thz);
  j["C_het"] = Num(C_het);
  j["penalty"] = {{"value", Num(penalty.value)},
                  {"additive", Num(penalty.additive)},
                  {"multiplicative", Num(penalty.multiplicative)},
                  {"excluded_subcarriers", penalty.excluded_count},
                  {"divergent", penalty.divergent}};
  auto arr = nlohmann::ordered_json::array();
  for (const auto &q : inequalities)
    arr.push_back({{"name", q.name},
                   {"lhs", Num(q.lhs)},
                   {"rhs", Num(q.rhs)},
                   {"satisfied", q.satisfied},
                   {"slack", Num(q.slack)},
                   {"in_feasibility", q.in_feasibility}});
  j["inequalities"] = arr;
  j["assumed_constants"] = assumed_constants;
  return j.dump(indent);
}

}  // namespace thzfl::analysis
