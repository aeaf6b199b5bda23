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

// Closed-form convergence quantities and design checks.

#ifndef THZFL_ANALYSIS_HPP_
#define THZFL_ANALYSIS_HPP_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "thzfl/channel.hpp"

namespace thzfl::analysis {

struct AnalysisConstants {
  double a1 = 8.0, a2 = 2.0, a3 = 8.0;
  double c0 = 1.0, c1 = 1.0, c2 = 1.0, c3 = 1.0;
  double L = 1.0;          // smoothness
  double G = 1.0;          // heterogeneity bound
  double sigma_sgd = 1.0;  // gradient-noise std
  double f_gap = 1.0;      // f(w_0) - f*
  // Names of the fields above that were defaulted rather than supplied or estimated.
  std::vector<std::string> assumed;

  void Validate() const;
};

// a1 eta^2 K^2 ||grad||^2 + a2 eta^2 K sigma^2 + a3 eta^2 K^2 G^2
double LocalEnergyBound(double grad_norm_sq, const AnalysisConstants &c, double lr_local,
                        std::size_t K);

// Per-subcarrier inputs of the penalty, already averaged over clients.
struct PenaltyInputs {
  std::vector<double> additive_var;  // sigma^2_eps,n
  std::vector<double> mean_gain;     // mu_bar_n
  std::vector<double> mult_var;      // sigma^2_H,n
  std::vector<double> omega;         // per-subcarrier quantizer bound
  std::vector<bool> excluded;        // dropped by the estimator floor

  std::size_t size() const { return mean_gain.size(); }
  void Validate() const;

  // Client-averaged view of a set of links. Gains are normalized by the
  // largest mean gain; sigma^2_eps,n = mu_bar^2 (d_sub / kappa) mean_i(1/snr).
  static PenaltyInputs FromLinks(std::span<const channel::LinkStatistics> links,
                                 std::span<const double> omega, double kappa, std::size_t d_sub);
};

struct Penalty {
  double value = 0.0;
  double additive = 0.0;        // (1/m) sum sigma^2 / mu_bar^2
  double multiplicative = 0.0;  // (1/m) mean(sigma^2_H + omega) (a2 .. + a3 ..)
  std::size_t excluded_count = 0;
  bool divergent = false;
};

Penalty ThzPenalty(const PenaltyInputs &in, const AnalysisConstants &c, double lr_local,
                   std::size_t K, std::size_t m);

// Sum_n [(1-d)^2 E/N_c + d ((sigma^2_H,n + omega_n) E/N_c + additive_n)].
// additive_n is the post-inversion additive error energy on subcarrier n.
double CommVarianceBound(double update_energy, std::span<const double> mult_var,
                         std::span<const double> omega, std::span<const double> additive,
                         double d_bar);

struct HarmonicMean {
  double value = 0.0;
  bool collapse = false;  // some entry was zero
};
HarmonicMean HarmonicMeanSnr(std::span<const double> snr);

// Sum_i (alpha_bar_i - 1/N)^2 G^2
double BiasFloor(std::span<const double> client_weights, double G);

// Smallest b >= 1 with d_sub / 4^b <= m / (4 L a1 eta^2 K^2) - sigma_bar^2_H.
std::optional<unsigned> QuantizationBudget(double mean_mult_var, const AnalysisConstants &c,
                                           double lr_local, std::size_t K, std::size_t m,
                                           std::size_t d_sub);

struct Schedule {
  std::size_t T = 10;
  std::size_t K = 1;
  std::size_t m = 10;
  double eta = 1.0;       // server step
  double eta_loc = 0.02;  // local step
  double epsilon = 0.1;   // target average stationarity
  double kappa = 0.0;     // <= 0 means d_sub
  std::size_t d_sub = 1;

  void Validate() const;
};

struct Inequality {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  bool satisfied = false;
  double slack = 0.0;  // lhs / rhs; infinite when rhs <= 0 or lhs diverges
  bool in_feasibility = true;
};

struct DesignReport {
  double C_opt = 0.0, C_sgd = 0.0, C_thz = 0.0, C_het = 0.0;
  Penalty penalty;
  std::vector<Inequality> inequalities;
  bool feasible = false;
  std::vector<std::string> assumed_constants;

  std::string ToText() const;
  std::string ToJson(int indent = 2) const;
};

DesignReport CheckDesign(const PenaltyInputs &in, const AnalysisConstants &c, const Schedule &s);

}  // namespace thzfl::analysis

#endif  // THZFL_ANALYSIS_HPP_
