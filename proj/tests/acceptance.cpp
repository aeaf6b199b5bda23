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

// Acceptance suite. Prints one PASS/FAIL line per criterion; pass criterion
// numbers as arguments to run a subset. Exit status is 1 if any line fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <numeric>
#include <string>
#include <thread>
#include <vector>

#include "fedavg_oracle.hpp"
#include "oracles.hpp"
#include "thzfl/analysis.hpp"
#include "thzfl/link.hpp"
#include "thzfl/scenario.hpp"

using namespace thzfl;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string Fmt(const char *f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::size_t Workers() { return std::max(1u, std::thread::hardware_concurrency()); }

// Final accuracy of every variant of a preset, in preset order.
std::vector<double> PresetAccuracies(const std::string &name) {
  std::vector<double> acc;
  for (const auto &v : scenario::Preset(name)) acc.push_back(scenario::RunScenario(v.config, {Workers()}).records.back().accuracy);
  return acc;
}

std::string List(const std::vector<double> &v) {
  std::string s;
  for (double x : v) s += (s.empty() ? "" : " ") + Fmt("%.3f", x);
  return s;
}

Outcome PowerCliff() {
  auto a = PresetAccuracies("power_sweep");  // 0.1 mW, 10 mW, 1 W
  return {a[2] >= 0.85 && a[0] <= 0.20 && a[0] <= a[1] && a[1] <= a[2], "accuracy " + List(a)};
}

Outcome SquintCollapse() {
  auto a = PresetAccuracies("squint");  // s = 1, 3, 5
  return {a[0] >= 0.85 && a[2] <= 0.20, "accuracy " + List(a)};
}

Outcome JitterCliff() {
  auto a = PresetAccuracies("jitter");  // 0, 0.2, 0.4, 0.5, 0.8 rad
  return {a[0] >= 0.85 && a[4] <= 0.20 && a[1] - a[2] >= 0.30, "accuracy " + List(a)};
}

Outcome Compensation() {
  auto a = PresetAccuracies("compensation");  // off, on
  return {a[0] <= 0.30 && a[1] >= 0.85, "accuracy " + List(a)};
}

Outcome DistanceLimit() {
  auto a = PresetAccuracies("distance");  // 10, 50, 100 m
  return {a[0] >= 0.85 && a[2] <= 0.20, "accuracy " + List(a)};
}

Outcome BandwidthLimit() {
  auto a = PresetAccuracies("bandwidth");  // 1, 5, 10 GHz
  return {a[0] > a[1] && a[1] > a[2] && a[0] - a[2] >= 0.05, "accuracy " + List(a)};
}

Outcome WeightedRescue() {
  auto a = PresetAccuracies("weighted_vs_fedavg");  // fedavg, snr-weighted
  return {a[0] <= 0.20 && a[1] >= 0.85, "accuracy " + List(a)};
}

channel::LinkStatistics Stats(std::vector<double> mu, std::vector<double> jitter, std::vector<double> noise) {
  channel::LinkStatistics s;
  s.mean_gains = std::move(mu);
  s.jitter_vars = std::move(jitter);
  s.noise_vars = std::move(noise);
  for (double v : s.noise_vars) s.snr.push_back(v > 0 ? 1.0 / v : 1e300);
  return s;
}

// Windowed pilot estimator with pilot length 1: z = theta + N(0, nu^2).
Outcome Hoeffding() {
  const double nu = 0.2, theta = 1.0;
  auto st = Stats({theta}, {0.0}, {nu * nu});
  std::vector<double> g{theta};
  Rng rng(8008);
  const int trials = 10000;
  double worst = -1.0;
  bool ok = true;
  for (std::size_t M : {8u, 32u, 128u})
    for (double eps : {0.05, 0.1, 0.2}) {
      int exceed = 0;
      for (int t = 0; t < trials; ++t) {
        link::GainEstimator est(1, M);
        for (std::size_t s = 0; s < M; ++s) est.Update(link::ExchangePilots(rng, st, g, true, 1));
        if (std::abs(est.estimates()[0] - theta) > eps) ++exceed;
      }
      const double rate = exceed / static_cast<double>(trials);
      const double bound = 2.0 * std::exp(-static_cast<double>(M) * eps * eps / (2.0 * nu * nu));
      if (rate > bound) ok = false;
      worst = std::max(worst, rate - bound);
    }
  return {ok, "9 (M, eps) pairs, max(rate - bound) = " + Fmt("%.4f", worst)};
}

// Monte-Carlo error energy of one client's update through a random erasure
// channel, against the closed-form bound at the empirical delivery rate.
Outcome CommBound() {
  Rng rng(9009);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  int violations = 0;
  double worst = 0.0;
  std::string rates;
  for (int cfg = 0; cfg < 20; ++cfg) {
    const std::size_t nc = 4;
    std::vector<double> mu(nc), jit(nc), nv(nc);
    for (std::size_t n = 0; n < nc; ++n) {
      mu[n] = 0.2 + U(rng);
      jit[n] = 0.5 * U(rng);
      nv[n] = 0.2 * U(rng);
    }
    auto st = Stats(mu, jit, nv);
    // Threshold at a random quantile of the spectral efficiency, so erasures occur.
    std::vector<double> se(2000);
    for (double &v : se) v = channel::SampleRealization(rng, st, 0.0).spectral_efficiency;
    std::sort(se.begin(), se.end());
    const double tau = se[static_cast<std::size_t>((0.05 + 0.45 * U(rng)) * se.size())];

    link::GainEstimator est(nc, 1);
    est.Override(mu);
    std::normal_distribution<double> N(0.0, 1.0);
    std::vector<double> x(64);
    for (double &v : x) v = N(rng);
    const double energy = testing::NormSq(x);
    const unsigned bits = cfg % 2 ? 3 : 0;
    auto q = link::QuantizerSpec::Uniform(nc, bits, 16);
    const int draws = 10000;
    double err = 0.0;
    int delivered = 0;
    for (int i = 0; i < draws; ++i) {
      const std::uint64_t seed = rng();
      auto p = link::Partition(link::Interleave(x, seed), nc);
      link::NormalizeSymbolEnergy(p);
      link::QuantizePayload(p, q, rng);
      auto real = channel::SampleRealization(rng, st, tau);
      if (!real.delivered) {
        err += energy;
        continue;
      }
      ++delivered;
      auto out = link::Compensate(link::Transmit(p, real, st, rng), est, link::Equalization::kEstimated, seed);
      for (std::size_t k = 0; k < x.size(); ++k) err += (out.values[k] - x[k]) * (out.values[k] - x[k]);
    }
    err /= draws;
    const double d_bar = delivered / static_cast<double>(draws);
    std::vector<double> additive(nc);
    for (std::size_t n = 0; n < nc; ++n) additive[n] = nv[n] * energy / nc;
    const double bound = analysis::CommVarianceBound(energy, jit, q.omega_bound, additive, d_bar);
    if (err > 1.05 * bound) ++violations;
    worst = std::max(worst, err / bound);
    if (cfg < 3) rates += Fmt("%.2f ", d_bar);
  }
  return {violations == 0, std::to_string(violations) + "/20 configs exceed bound+5%, worst ratio " +
                               Fmt("%.3f", worst) + ", sample delivery rates " + rates};
}

Outcome LocalEnergy() {
  Rng rng(1010);
  std::uniform_real_distribution<double> U(0.05, 1.0);
  std::uniform_int_distribution<int> Kd(1, 8);
  int violations = 0;
  double worst = 0.0;
  for (int inst = 0; inst < 100; ++inst) {
    auto fleet = testing::MakeQuadraticFleet(rng, 4, 3, 12);
    const double lr = U(rng) / (2.0 * fleet.L);
    const auto K = static_cast<std::size_t>(Kd(rng));
    analysis::AnalysisConstants c;
    c.L = fleet.L;
    c.G = fleet.G;
    c.sigma_sgd = fleet.sigma;
    const double bound = analysis::LocalEnergyBound(testing::GlobalGradNormSq(fleet, fleet.w0), c, lr, K);
    bool bad = false;
    for (const auto &client : fleet.clients) {
      double mean = 0.0;
      const int runs = 200;
      for (int r = 0; r < runs; ++r) mean += testing::NormSq(fl::LocalSgd(client, fleet.w0, {K, lr, 1}, rng));
      mean /= runs;
      worst = std::max(worst, mean / bound);
      bad = bad || mean > bound;
    }
    violations += bad;
  }
  return {violations == 0, std::to_string(violations) + "/100 violations, worst ratio " + Fmt("%.3f", worst)};
}

Outcome Qsgd() {
  Rng rng(1111);
  std::normal_distribution<double> N(0.0, 1.0);
  const int draws = 100000;
  const std::size_t d = 16;
  bool ok = true;
  std::string detail;
  for (unsigned b : {1u, 2u, 4u, 8u}) {
    std::vector<double> x(d);
    for (double &v : x) v = N(rng);
    std::vector<double> s(d, 0.0), s2(d, 0.0);
    double mse = 0.0;
    for (int i = 0; i < draws; ++i) {
      auto q = link::QsgdQuantize(x, b, rng);
      for (std::size_t k = 0; k < d; ++k) {
        s[k] += q[k];
        s2[k] += q[k] * q[k];
        mse += (q[k] - x[k]) * (q[k] - x[k]);
      }
    }
    int biased = 0;
    for (std::size_t k = 0; k < d; ++k) {
      const double mean = s[k] / draws;
      const double var = std::max(s2[k] / draws - mean * mean, 0.0);
      if (std::abs(mean - x[k]) > 3.0 * std::sqrt(var / draws) + 1e-12) ++biased;
    }
    const double ratio = (mse / draws) / (link::QsgdOmega(d, b) * testing::NormSq(x));
    ok = ok && biased == 0 && ratio <= 1.0;
    detail += "b=" + std::to_string(b) + ": " + std::to_string(biased) + " biased, mse/bound " + Fmt("%.3f", ratio) + "; ";
  }
  return {ok, detail};
}

Outcome Golden() {
  const double g = channel::PathGain(300e9, 10.0, 0.0);
  const double n = channel::NoiseVariance(290.0, channel::BuildGrid(300e9, 10e9, 128));
  const bool ok = std::abs(g / 6.333e-11 - 1.0) <= 1e-3 && std::abs(n / 3.128e-13 - 1.0) <= 1e-3;
  return {ok, "path gain " + Fmt("%.5e", g) + ", noise " + Fmt("%.5e", n) + " W"};
}

Outcome HarmonicHole() {
  analysis::AnalysisConstants c;
  analysis::PenaltyInputs in;
  in.additive_var.assign(127, 1.0);
  in.mean_gain.assign(127, 1.0);
  in.mult_var.assign(127, 0.0);
  const double base = analysis::ThzPenalty(in, c, 0.02, 1, 1).additive;
  in.additive_var.push_back(1.0);
  in.mean_gain.push_back(1e-3);
  in.mult_var.push_back(0.0);
  const double with_hole = analysis::ThzPenalty(in, c, 0.02, 1, 1).additive;
  const double factor = (with_hole - base) / (base / 127);
  return {factor >= 1000.0, "increase = " + Fmt("%.4g", factor) + " x per-subcarrier baseline"};
}

Outcome Transparency() {
  scenario::ScenarioConfig c;
  c.name = "transparency";
  c.seed = 20260101;
  c.link.transparent = true;
  std::vector<double> acc;
  const auto want = testing::ReferenceFedAvg(c, acc);
  const auto run = scenario::RunScenario(c, {Workers()});
  bool same = run.final_weights == want && run.records.size() == acc.size();
  for (std::size_t t = 0; same && t < acc.size(); ++t) same = run.records[t].accuracy == acc[t];
  return {same, std::to_string(run.records.size()) + " rounds, " + std::to_string(want.size()) +
                    " parameters, final accuracy " + Fmt("%.3f", acc.empty() ? 0.0 : acc.back())};
}

}  // namespace

int main(int argc, char **argv) {
  const std::map<int, std::pair<const char *, std::function<Outcome()>>> criteria = {
      {1, {"power cliff", PowerCliff}},
      {2, {"squint collapse", SquintCollapse}},
      {3, {"jitter cliff", JitterCliff}},
      {4, {"compensation necessity", Compensation}},
      {5, {"distance limit", DistanceLimit}},
      {6, {"bandwidth limit", BandwidthLimit}},
      {7, {"weighted aggregation rescue", WeightedRescue}},
      {8, {"pilot estimator Hoeffding envelope", Hoeffding}},
      {9, {"communication error within closed-form bound", CommBound}},
      {10, {"local update energy bound", LocalEnergy}},
      {11, {"QSGD unbiasedness and variance", Qsgd}},
      {12, {"physics golden values", Golden}},
      {13, {"single spectral hole amplification", HarmonicHole}},
      {14, {"transparent channel equals FedAvg", Transparency}},
  };
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));
  if (selected.empty())
    for (const auto &kv : criteria) selected.push_back(kv.first);

  int failures = 0;
  for (int id : selected) {
    auto it = criteria.find(id);
    if (it == criteria.end()) {
      std::printf("FAIL [%d] unknown criterion\n", id);
      ++failures;
      continue;
    }
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = it->second.second();
    } catch (const std::exception &e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s [%d] %s: %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", id, it->second.first, o.detail.c_str(), secs);
    std::fflush(stdout);
    failures += !o.pass;
  }
  return failures == 0 ? 0 : 1;
}
