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

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <memory>
#include <numeric>
#include <thread>

#include "thzfl/data_io.hpp"
#include "thzfl/scenario.hpp"

namespace thzfl::scenario {

namespace {

struct Setup {
  data::Dataset train, test;
  std::vector<data::Dataset> shards;
  std::vector<std::unique_ptr<fl::ClassifierObjective>> objectives;
  channel::SubcarrierGrid grid;
  std::vector<channel::LinkStatistics> stats;
  fl::ModelSpec spec;
  link::ModelVector w0;
  std::size_t d = 0, d_sub = 0;
  link::QuantizerSpec quant;
  std::vector<std::size_t> steps;  // K per client
};

Setup Build(const ScenarioConfig &c) {
  Setup s;
  const std::uint64_t seed = c.seed;
  const auto &dc = c.data;
  if (dc.source == "idx") {
    Rng rng = Substream(seed, kServerId, 0, Stream::kData);
    s.train = data::Subsample(data::LoadIdx(dc.train_images, dc.train_labels), dc.n_train, rng);
    s.test = data::Subsample(data::LoadIdx(dc.test_images, dc.test_labels), dc.n_test, rng);
    if (s.train.input_dim != dc.input_dim)
      throw ConfigError({"data.input_dim: does not match the IDX images (" +
                         std::to_string(s.train.input_dim) + ")"});
    s.train.n_classes = s.test.n_classes = std::max({s.train.n_classes, s.test.n_classes, dc.n_classes});
  } else {
    // One draw shares the class centres between the train and test splits.
    Rng rng = Substream(seed, kServerId, 0, Stream::kData);
    auto all = data::SyntheticDataset(dc.n_train + dc.n_test, dc.input_dim, dc.n_classes,
                                      dc.separation, rng);
    std::vector<std::size_t> tr(dc.n_train), te(dc.n_test);
    std::iota(tr.begin(), tr.end(), std::size_t{0});
    std::iota(te.begin(), te.end(), dc.n_train);
    s.train = all.Subset(tr);
    s.test = all.Subset(te);
  }

  Rng shard_rng = Substream(seed, kServerId, 0, Stream::kShard);
  const auto plan = data::Shard(s.train, c.fl.n_clients, {dc.shard, dc.dirichlet_beta}, shard_rng);
  s.spec = c.model();
  s.spec.n_classes = s.train.n_classes;
  for (const auto &members : plan.Members()) {
    s.shards.push_back(s.train.Subset(members));
  }
  for (const auto &sh : s.shards) {
    s.objectives.push_back(std::make_unique<fl::ClassifierObjective>(s.spec, sh));
    const std::size_t per_epoch = (sh.size() + c.fl.batch_size - 1) / c.fl.batch_size;
    s.steps.push_back(per_epoch * c.fl.local_epochs);
  }

  const auto &ph = c.physics;
  s.grid = channel::BuildGrid(ph.center_freq_hz, ph.bandwidth_hz, ph.n_subcarriers);
  const auto absorption = ph.absorption_table.empty()
                              ? channel::AbsorptionTable::Flat(ph.absorption_per_m)
                              : channel::AbsorptionTable::LoadCsv(ph.absorption_table);
  for (std::size_t i = 0; i < c.fl.n_clients; ++i) {
    if (c.link.transparent) {
      s.stats.push_back(channel::LinkStatistics::Transparent(ph.n_subcarriers));
      continue;
    }
    const auto &g = ph.client_geometries.empty() ? ph.geometry : ph.client_geometries[i];
    s.stats.push_back(channel::ComputeLinkStatistics(s.grid, g.ToLinkGeometry(), absorption,
                                                     ph.noise_temp_k, ph.power_allocation));
  }

  Rng init = Substream(seed, kServerId, 0, Stream::kModelInit);
  s.w0 = fl::InitWeights(s.spec, init);
  s.d = s.w0.size();
  s.d_sub = (s.d + ph.n_subcarriers - 1) / ph.n_subcarriers;
  s.quant = link::QuantizerSpec::Uniform(ph.n_subcarriers, c.link.bits, s.d_sub);
  return s;
}

double SquaredNorm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

double Db(double x) { return 10.0 * std::log10(std::clamp(x, 1e-30, 1e30)); }

struct ClientOutcome {
  link::ModelVector update;  // compensated; empty when erased
  bool delivered = false;
  std::size_t excluded = 0;
  double error_energy = 0.0;
  double bound = 0.0;
};

// Runs fn(k) for k in [0, n) on up to `workers` threads. Results must be
// written to per-k slots so scheduling cannot change the outcome.
template <class Fn>
void ParallelFor(std::size_t n, std::size_t workers, Fn fn) {
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (workers == 1) {
    for (std::size_t k = 0; k < n; ++k) fn(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t k = next++; k < n; k = next++) fn(k);
      } catch (...) {
        errors[w] = std::current_exception();
        next = n;
      }
    });
  }
  for (auto &t : pool) t.join();
  for (auto &e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace

RunSummary RunScenario(const ScenarioConfig &c, const RunOptions &options) {
  Validate(c);
  Setup s = Build(c);
  const std::uint64_t seed = c.seed;
  const std::size_t n_clients = c.fl.n_clients;
  const std::size_t n_sub = c.physics.n_subcarriers;
  const auto eq = c.link.compensation ? link::Equalization::kEstimated : link::Equalization::kNone;
  const double tau = c.link.transparent ? 0.0 : c.physics.erasure_threshold;

  link::FloorPolicy floor{c.link.floor_relative, c.link.floor_absolute};
  std::vector<link::GainEstimator> estimators;
  for (std::size_t i = 0; i < n_clients; ++i) estimators.emplace_back(n_sub, c.link.pilot_window, floor);
  std::vector<std::size_t> scheduled_count(n_clients, 0), delivered_count(n_clients, 0);

  RunSummary out;
  out.name = c.name;
  {
    std::vector<const fl::Objective *> objs;
    for (const auto &o : s.objectives) objs.push_back(o.get());
    out.G = c.analysis.G ? *c.analysis.G : fl::EstimateHeterogeneity(objs, s.w0);
  }
  link::ModelVector w = s.w0;
  out.initial_accuracy = fl::Evaluate(s.spec, w, s.test).accuracy;
  const std::size_t m = c.participants();

  for (std::size_t t = 0; t < c.fl.rounds; ++t) {
    std::vector<std::size_t> sched(n_clients);
    std::iota(sched.begin(), sched.end(), std::size_t{0});
    if (m < n_clients) {
      Rng pick = Substream(seed, kServerId, t, Stream::kSampling);
      std::shuffle(sched.begin(), sched.end(), pick);
      sched.resize(m);
      std::sort(sched.begin(), sched.end());
    }
    std::optional<std::uint64_t> perm_seed;
    if (c.link.interleaving) perm_seed = Substream(seed, kServerId, t, Stream::kInterleave)();

    std::vector<ClientOutcome> res(sched.size());
    ParallelFor(sched.size(), options.workers, [&](std::size_t k) {
      const std::size_t i = sched[k];
      ClientOutcome &o = res[k];
      Rng sgd = Substream(seed, i, t, Stream::kLocalSgd);
      const auto delta = fl::LocalSgd(*s.objectives[i], w, {s.steps[i], c.fl.lr_local, c.fl.batch_size}, sgd);

      const auto &st = s.stats[i];
      link::SubcarrierPayload payload =
          link::Partition(perm_seed ? link::Interleave(delta, *perm_seed) : delta, n_sub);
      link::NormalizeSymbolEnergy(payload);
      Rng qrng = Substream(seed, i, t, Stream::kQuantize);
      link::QuantizePayload(payload, s.quant, qrng);

      Rng ch = Substream(seed, i, t, Stream::kChannel);
      const auto real = channel::SampleRealization(ch, st, tau);
      Rng pr = Substream(seed, i, t, Stream::kPilot);
      std::vector<double> pilot_gains = real.gains;
      if (!c.link.pilot_shares_fading) pilot_gains = channel::SampleRealization(pr, st, tau).gains;
      const auto z = link::ExchangePilots(pr, st, pilot_gains, real.delivered, c.link.pilot_length);
      auto &est = estimators[i];
      if (c.link.exact_csi) est.Override(st.mean_gains);
      else est.Update(z);

      Rng nz = Substream(seed, i, t, Stream::kNoise);
      const auto rx = link::Transmit(payload, real, st, nz);
      o.delivered = real.delivered;
      const double energy = SquaredNorm(delta);
      if (o.delivered) {
        auto comp = link::Compensate(rx, est, eq, perm_seed);
        o.excluded = comp.excluded_subcarriers;
        double err = 0.0;
        for (std::size_t j = 0; j < delta.size(); ++j) err += (comp.values[j] - delta[j]) * (comp.values[j] - delta[j]);
        o.error_energy = err;
        o.update = std::move(comp.values);
      } else {
        o.error_energy = energy;
      }

      // Closed-form bound with the client's empirical delivery rate so far.
      const double d_bar = static_cast<double>(delivered_count[i] + (o.delivered ? 1 : 0)) /
                           static_cast<double>(scheduled_count[i] + 1);
      std::vector<double> additive(n_sub);
      for (std::size_t n = 0; n < n_sub; ++n) {
        const double nv = st.noise_vars[n];
        additive[n] = nv > 0.0 ? energy / static_cast<double>(n_sub) * nv : 0.0;
      }
      o.bound = analysis::CommVarianceBound(energy, st.jitter_vars, s.quant.omega_bound, additive, d_bar);
    });

    RoundRecord rec;
    rec.round = t;
    rec.delivered.assign(n_clients, -1);
    rec.client_weights.assign(n_clients, 0.0);
    std::vector<link::ModelVector> delivered_updates;
    double err = 0.0, bound = 0.0;
    for (std::size_t k = 0; k < sched.size(); ++k) {
      const std::size_t i = sched[k];
      ++scheduled_count[i];
      if (res[k].delivered) ++delivered_count[i];
      rec.delivered[i] = res[k].delivered ? 1 : 0;
      rec.excluded_subcarriers += res[k].excluded;
      err += res[k].error_energy;
      bound += res[k].bound;
      if (res[k].delivered) {
        ++rec.n_delivered;
        delivered_updates.push_back(res[k].update);
      }
    }
    rec.comm_error_energy = err / static_cast<double>(sched.size());
    rec.comm_bound = bound / static_cast<double>(sched.size());
    rec.erasure_rate = 1.0 - static_cast<double>(rec.n_delivered) / static_cast<double>(sched.size());

    double snr_sum = 0.0, inv_sum = 0.0;
    bool collapse = false;
    std::size_t cnt = 0;
    for (std::size_t i : sched)
      for (double v : s.stats[i].snr) {
        snr_sum += v;
        if (v <= 0.0) collapse = true;
        else inv_sum += 1.0 / v;
        ++cnt;
      }
    rec.mean_snr_db = Db(snr_sum / static_cast<double>(cnt));
    rec.harmonic_snr_db = collapse ? Db(0.0) : Db(static_cast<double>(cnt) / inv_sum);

    link::ModelVector step(s.d, 0.0);
    if (rec.n_delivered == 0) {
      rec.warning = "no deliveries; global model unchanged";
    } else if (c.fl.aggregation == fl::AggregationMode::kUniform) {
      step = fl::AggregateUnweighted(delivered_updates, c.fl.server_lr, s.d);
      for (std::size_t k = 0; k < sched.size(); ++k)
        if (res[k].delivered) rec.client_weights[sched[k]] = 1.0 / static_cast<double>(rec.n_delivered);
    } else {
      std::vector<fl::ClientLinkView> views;
      std::vector<link::ModelVector> updates;
      for (std::size_t k = 0; k < sched.size(); ++k) {
        const auto &st = s.stats[sched[k]];
        views.push_back({res[k].delivered, st.noise_vars, st.jitter_vars, s.quant.omega_bound});
        updates.push_back(res[k].delivered ? std::move(res[k].update) : link::ModelVector{});
      }
      const auto weights = fl::ComputeWeights(views, n_sub, fl::AggregationMode::kSnrWeighted);
      const auto layout = link::SubcarrierOfCoordinate(s.d, n_sub, perm_seed);
      step = fl::AggregateWeighted(updates, weights, layout, c.fl.server_lr);
      const auto avg = weights.ClientAverages();
      for (std::size_t k = 0; k < sched.size(); ++k) rec.client_weights[sched[k]] = avg[k];
    }
    for (std::size_t j = 0; j < s.d; ++j) w[j] += step[j];
    if (!std::all_of(w.begin(), w.end(), [](double v) { return std::isfinite(v); })) {
      rec.warning += rec.warning.empty() ? "" : "; ";
      rec.warning += "non-finite global model";
    }
    rec.bias_floor = analysis::BiasFloor(rec.client_weights, out.G);
    const auto ev = fl::Evaluate(s.spec, w, s.test);
    rec.accuracy = ev.accuracy;
    rec.loss = ev.loss;
    out.records.push_back(std::move(rec));
  }
  out.final_accuracy = out.records.back().accuracy;
  out.final_weights = std::move(w);
  return out;
}

analysis::DesignReport DesignCheck(const ScenarioConfig &c) {
  Validate(c);
  Setup s = Build(c);
  const auto &a = c.analysis;
  analysis::AnalysisConstants k;
  k.a1 = a.a1;
  k.a2 = a.a2;
  k.a3 = a.a3;
  k.c0 = a.c0;
  k.c1 = a.c1;
  k.c2 = a.c2;
  k.c3 = a.c3;
  const auto &obj = *s.objectives.front();
  Rng rng = Substream(c.seed, kServerId, 0, Stream::kTest);
  if (a.L) k.L = *a.L;
  else {
    k.L = fl::EstimateSmoothness(obj, s.w0, rng);
    k.assumed.push_back("L (estimated)");
  }
  if (a.G) k.G = *a.G;
  else {
    std::vector<const fl::Objective *> objs;
    for (const auto &o : s.objectives) objs.push_back(o.get());
    k.G = fl::EstimateHeterogeneity(objs, s.w0);
    k.assumed.push_back("G (estimated)");
  }
  if (a.sigma_sgd) k.sigma_sgd = *a.sigma_sgd;
  else {
    k.sigma_sgd = std::sqrt(fl::EstimateSgdVariance(obj, s.w0, c.fl.batch_size, rng));
    k.assumed.push_back("sigma_sgd (estimated)");
  }
  if (a.f_gap) k.f_gap = *a.f_gap;
  else {
    double loss = 0.0;
    std::vector<double> g(s.d);
    for (const auto &o : s.objectives) loss += o->FullLossGrad(s.w0, g);
    k.f_gap = loss / static_cast<double>(s.objectives.size());
    k.assumed.push_back("f_gap (initial loss, f* taken as 0)");
  }
  const std::pair<const char *, double> cs[] = {{"c0", a.c0}, {"c1", a.c1}, {"c2", a.c2}, {"c3", a.c3}};
  for (const auto &[n, v] : cs)
    if (v == 1.0) k.assumed.push_back(std::string(n) + "=1 (default)");

  analysis::Schedule sch;
  sch.T = c.fl.rounds;
  sch.K = static_cast<std::size_t>(std::llround(
      std::accumulate(s.steps.begin(), s.steps.end(), 0.0) / static_cast<double>(s.steps.size())));
  sch.K = std::max<std::size_t>(sch.K, 1);
  sch.m = c.participants();
  sch.eta = c.fl.server_lr;
  sch.eta_loc = c.fl.lr_local;
  sch.epsilon = a.epsilon;
  sch.kappa = a.kappa;
  sch.d_sub = s.d_sub;
  auto in = analysis::PenaltyInputs::FromLinks(s.stats, s.quant.omega_bound, a.kappa, s.d_sub);
  return analysis::CheckDesign(in, k, sch);
}

}  // namespace thzfl::scenario
