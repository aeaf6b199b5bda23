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

#include "thzfl/fl_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace thzfl::fl {

namespace {

// Views into the flat parameter vector.
struct Layers {
  const double *w1 = nullptr;  // hidden x in (MLP) or classes x in (logistic)
  const double *b1 = nullptr;
  const double *w2 = nullptr;  // classes x hidden (MLP only)
  const double *b2 = nullptr;
};

Layers View(const ModelSpec &spec, const double *w) {
  Layers l;
  if (spec.architecture == Architecture::kLogistic) {
    l.w1 = w;
    l.b1 = w + spec.n_classes * spec.input_dim;
    return l;
  }
  l.w1 = w;
  l.b1 = l.w1 + spec.hidden * spec.input_dim;
  l.w2 = l.b1 + spec.hidden;
  l.b2 = l.w2 + spec.n_classes * spec.hidden;
  return l;
}

void Softmax(std::vector<double> &z) {
  const double mx = *std::max_element(z.begin(), z.end());
  double s = 0.0;
  for (double &v : z) {
    v = std::exp(v - mx);
    s += v;
  }
  for (double &v : z) v /= s;
}

void CheckSpec(const ModelSpec &spec) {
  if (spec.input_dim == 0 || spec.n_classes < 2) ThrowInvalid("model needs input_dim >= 1 and n_classes >= 2");
  if (spec.architecture == Architecture::kMlp && spec.hidden == 0) ThrowInvalid("MLP hidden width must be >= 1");
}

// Forward pass keeping the hidden activations; returns probabilities.
std::vector<double> Forward(const ModelSpec &spec, const Layers &l, std::span<const double> x,
                            std::vector<double> *hidden) {
  std::vector<double> z(spec.n_classes);
  if (spec.architecture == Architecture::kLogistic) {
    for (std::size_t k = 0; k < spec.n_classes; ++k) {
      const double *row = l.w1 + k * spec.input_dim;
      double a = l.b1[k];
      for (std::size_t j = 0; j < spec.input_dim; ++j) a += row[j] * x[j];
      z[k] = a;
    }
  } else {
    std::vector<double> h(spec.hidden);
    for (std::size_t u = 0; u < spec.hidden; ++u) {
      const double *row = l.w1 + u * spec.input_dim;
      double a = l.b1[u];
      for (std::size_t j = 0; j < spec.input_dim; ++j) a += row[j] * x[j];
      h[u] = a > 0.0 ? a : 0.0;
    }
    for (std::size_t k = 0; k < spec.n_classes; ++k) {
      const double *row = l.w2 + k * spec.hidden;
      double a = l.b2[k];
      for (std::size_t u = 0; u < spec.hidden; ++u) a += row[u] * h[u];
      z[k] = a;
    }
    if (hidden) *hidden = std::move(h);
  }
  Softmax(z);
  return z;
}

double CrossEntropy(const std::vector<double> &p, std::uint32_t label) {
  return -std::log(std::max(p[label], std::numeric_limits<double>::min()));
}

}  // namespace

std::size_t ModelSpec::ParameterCount() const {
  if (architecture == Architecture::kLogistic) return n_classes * input_dim + n_classes;
  return hidden * input_dim + hidden + n_classes * hidden + n_classes;
}

ModelVector InitWeights(const ModelSpec &spec, Rng &rng) {
  CheckSpec(spec);
  ModelVector w(spec.ParameterCount(), 0.0);
  std::normal_distribution<double> n01(0.0, 1.0);
  if (spec.architecture == Architecture::kLogistic) {
    const double s = std::sqrt(1.0 / static_cast<double>(spec.input_dim));
    for (std::size_t i = 0; i < spec.n_classes * spec.input_dim; ++i) w[i] = s * n01(rng);
    return w;
  }
  const double s1 = std::sqrt(2.0 / static_cast<double>(spec.input_dim));
  const double s2 = std::sqrt(1.0 / static_cast<double>(spec.hidden));
  const std::size_t n1 = spec.hidden * spec.input_dim;
  for (std::size_t i = 0; i < n1; ++i) w[i] = s1 * n01(rng);
  const std::size_t off2 = n1 + spec.hidden;
  for (std::size_t i = 0; i < spec.n_classes * spec.hidden; ++i) w[off2 + i] = s2 * n01(rng);
  return w;
}

std::vector<double> Predict(const ModelSpec &spec, std::span<const double> weights,
                            std::span<const double> input) {
  CheckSpec(spec);
  if (weights.size() != spec.ParameterCount()) ThrowInvalid("weight count does not match architecture");
  if (input.size() != spec.input_dim) ThrowInvalid("input length does not match input_dim");
  return Forward(spec, View(spec, weights.data()), input, nullptr);
}

double Objective::FullLossGrad(std::span<const double> w, std::span<double> grad) const {
  std::vector<std::size_t> all(n_samples());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return LossGrad(w, all, grad);
}

ClassifierObjective::ClassifierObjective(ModelSpec spec, const data::Dataset &shard)
    : spec_(spec), shard_(&shard) {
  CheckSpec(spec_);
  if (shard.input_dim != spec_.input_dim) ThrowInvalid("shard input_dim does not match the model");
}

double ClassifierObjective::LossGrad(std::span<const double> w, std::span<const std::size_t> batch,
                                     std::span<double> grad) const {
  if (batch.empty()) ThrowInvalid("empty batch");
  if (w.size() != dim() || grad.size() != dim()) ThrowInvalid("weight/gradient length mismatch");
  std::fill(grad.begin(), grad.end(), 0.0);
  const Layers l = View(spec_, w.data());
  double *g = grad.data();
  const std::size_t in = spec_.input_dim;
  const std::size_t nc = spec_.n_classes;
  double loss = 0.0;
  std::vector<double> h;
  std::vector<double> dh;
  for (std::size_t idx : batch) {
    const auto x = shard_->sample(idx);
    const std::uint32_t y = shard_->labels[idx];
    std::vector<double> p = Forward(spec_, l, x, &h);
    loss += CrossEntropy(p, y);
    p[y] -= 1.0;  // dL/dz
    if (spec_.architecture == Architecture::kLogistic) {
      double *gb = g + nc * in;
      for (std::size_t k = 0; k < nc; ++k) {
        double *row = g + k * in;
        for (std::size_t j = 0; j < in; ++j) row[j] += p[k] * x[j];
        gb[k] += p[k];
      }
      continue;
    }
    const std::size_t hid = spec_.hidden;
    double *gw1 = g;
    double *gb1 = gw1 + hid * in;
    double *gw2 = gb1 + hid;
    double *gb2 = gw2 + nc * hid;
    dh.assign(hid, 0.0);
    for (std::size_t k = 0; k < nc; ++k) {
      const double *wrow = l.w2 + k * hid;
      double *grow = gw2 + k * hid;
      for (std::size_t u = 0; u < hid; ++u) {
        grow[u] += p[k] * h[u];
        dh[u] += p[k] * wrow[u];
      }
      gb2[k] += p[k];
    }
    for (std::size_t u = 0; u < hid; ++u) {
      if (h[u] <= 0.0) continue;
      double *row = gw1 + u * in;
      for (std::size_t j = 0; j < in; ++j) row[j] += dh[u] * x[j];
      gb1[u] += dh[u];
    }
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (double &v : grad) v *= inv;
  return loss * inv;
}

QuadraticObjective::QuadraticObjective(std::size_t dim, std::vector<double> hessian,
                                       std::vector<double> centres)
    : dim_(dim), hessian_(std::move(hessian)), centres_(std::move(centres)) {
  if (dim_ == 0) ThrowInvalid("quadratic dimension must be >= 1");
  if (hessian_.size() != dim_ * dim_) ThrowInvalid("hessian must be dim x dim");
  if (centres_.empty() || centres_.size() % dim_ != 0) ThrowInvalid("centres must be a non-empty multiple of dim");
}

QuadraticObjective QuadraticObjective::Isotropic(std::size_t dim) {
  std::vector<double> a(dim * dim, 0.0);
  for (std::size_t i = 0; i < dim; ++i) a[i * dim + i] = 1.0;
  return QuadraticObjective(dim, std::move(a), std::vector<double>(dim, 0.0));
}

std::vector<double> QuadraticObjective::MeanCentre() const {
  std::vector<double> c(dim_, 0.0);
  const std::size_t n = n_samples();
  for (std::size_t s = 0; s < n; ++s)
    for (std::size_t j = 0; j < dim_; ++j) c[j] += centres_[s * dim_ + j];
  for (double &v : c) v /= static_cast<double>(n);
  return c;
}

double QuadraticObjective::LossGrad(std::span<const double> w, std::span<const std::size_t> batch,
                                    std::span<double> grad) const {
  if (batch.empty()) ThrowInvalid("empty batch");
  if (w.size() != dim_ || grad.size() != dim_) ThrowInvalid("weight/gradient length mismatch");
  std::fill(grad.begin(), grad.end(), 0.0);
  std::vector<double> r(dim_);
  double loss = 0.0;
  for (std::size_t s : batch) {
    for (std::size_t j = 0; j < dim_; ++j) r[j] = w[j] - centres_[s * dim_ + j];
    for (std::size_t i = 0; i < dim_; ++i) {
      double ar = 0.0;
      for (std::size_t j = 0; j < dim_; ++j) ar += hessian_[i * dim_ + j] * r[j];
      grad[i] += ar;
      loss += 0.5 * r[i] * ar;
    }
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (double &v : grad) v *= inv;
  return loss * inv;
}

ModelVector LocalSgd(const Objective &objective, std::span<const double> w0,
                     const SgdSchedule &schedule, Rng &rng) {
  if (schedule.steps < 1) ThrowInvalid("local SGD needs steps >= 1");
  if (!(schedule.lr >= 0.0) || !std::isfinite(schedule.lr)) ThrowInvalid("local learning rate must be finite and >= 0");
  if (schedule.batch_size < 1) ThrowInvalid("batch size must be >= 1");
  const std::size_t n = objective.n_samples();
  if (n == 0) ThrowInvalid("local SGD on an empty shard");
  if (w0.size() != objective.dim()) ThrowInvalid("initial weights do not match the objective");

  ModelVector w(w0.begin(), w0.end());
  ModelVector g(w.size());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t b = std::min(schedule.batch_size, n);
  std::size_t cursor = n;  // forces a shuffle on the first step
  for (std::size_t k = 0; k < schedule.steps; ++k) {
    if (cursor >= n) {
      if (b < n) std::shuffle(order.begin(), order.end(), rng);
      cursor = 0;
    }
    const std::size_t len = std::min(b, n - cursor);
    objective.LossGrad(w, std::span<const std::size_t>(order.data() + cursor, len), g);
    cursor += len;
    for (std::size_t j = 0; j < w.size(); ++j) w[j] -= schedule.lr * g[j];
  }
  for (std::size_t j = 0; j < w.size(); ++j) w[j] -= w0[j];
  return w;
}

ModelVector AggregateUnweighted(std::span<const ModelVector> delivered, double server_lr,
                                std::size_t dim) {
  ModelVector out(dim, 0.0);
  if (delivered.empty()) return out;
  for (const auto &u : delivered)
    if (u.size() != dim) ThrowInvalid("update length mismatch in aggregation");
  const double m = static_cast<double>(delivered.size());
  for (std::size_t j = 0; j < dim; ++j) {
    double s = 0.0;
    for (const auto &u : delivered) s += u[j];
    out[j] = server_lr * (s / m);
  }
  return out;
}

std::vector<double> AggregationWeights::ClientAverages() const {
  std::vector<double> avg(n_clients, 0.0);
  if (n_subcarriers == 0) return avg;
  for (std::size_t i = 0; i < n_clients; ++i) {
    double s = 0.0;
    for (std::size_t n = 0; n < n_subcarriers; ++n) s += at(i, n);
    avg[i] = s / static_cast<double>(n_subcarriers);
  }
  return avg;
}

AggregationWeights ComputeWeights(std::span<const ClientLinkView> clients,
                                  std::size_t n_subcarriers, AggregationMode mode,
                                  double weight_floor) {
  AggregationWeights w;
  w.n_clients = clients.size();
  w.n_subcarriers = n_subcarriers;
  w.alpha.assign(w.n_clients * n_subcarriers, 0.0);
  w.delivered.resize(w.n_clients);
  std::size_t m = 0;
  for (std::size_t i = 0; i < clients.size(); ++i) {
    w.delivered[i] = clients[i].delivered;
    if (clients[i].delivered) ++m;
  }
  if (m == 0) return w;

  auto term = [](std::span<const double> v, std::size_t n) { return v.empty() ? 0.0 : v[n]; };
  const double uniform = 1.0 / static_cast<double>(m);
  for (std::size_t n = 0; n < n_subcarriers; ++n) {
    double total = 0.0;
    bool all_equal = true;
    double first = -1.0;
    for (std::size_t i = 0; i < clients.size(); ++i) {
      if (!clients[i].delivered) continue;
      double a = 1.0;
      if (mode == AggregationMode::kSnrWeighted) {
        const auto &c = clients[i];
        const double eff = term(c.noise_vars, n) + term(c.jitter_vars, n) + term(c.omega, n);
        // Zero effective noise is a perfect link; cap the weight rather than divide by 0.
        a = std::isfinite(eff) ? 1.0 / std::max(eff, 1e-12) : 0.0;
        a = std::max(a, weight_floor);
      }
      if (first < 0.0) first = a;
      all_equal = all_equal && a == first;
      w.alpha[i * n_subcarriers + n] = a;
      total += a;
    }
    for (std::size_t i = 0; i < clients.size(); ++i)
      if (clients[i].delivered)
        w.alpha[i * n_subcarriers + n] = all_equal ? uniform : w.alpha[i * n_subcarriers + n] / total;
  }
  return w;
}

ModelVector AggregateWeighted(std::span<const ModelVector> updates,
                              const AggregationWeights &weights,
                              std::span<const std::uint32_t> subcarrier_of, double server_lr) {
  if (updates.size() != weights.n_clients) ThrowInvalid("updates and weights disagree on client count");
  const std::size_t dim = subcarrier_of.size();
  ModelVector out(dim, 0.0);
  std::vector<std::size_t> live;
  for (std::size_t i = 0; i < weights.n_clients; ++i)
    if (weights.delivered[i]) {
      if (updates[i].size() != dim) ThrowInvalid("update length mismatch in aggregation");
      live.push_back(i);
    }
  if (live.empty()) return out;

  // Subcarriers whose weights are all equal take the plain-mean path so the
  // result matches the unweighted rule bit for bit.
  std::vector<bool> uniform(weights.n_subcarriers, true);
  std::vector<double> total(weights.n_subcarriers, 0.0);
  for (std::size_t n = 0; n < weights.n_subcarriers; ++n) {
    const double first = weights.at(live.front(), n);
    for (std::size_t i : live) {
      total[n] += weights.at(i, n);
      if (weights.at(i, n) != first) uniform[n] = false;
    }
  }
  const double m = static_cast<double>(live.size());
  for (std::size_t j = 0; j < dim; ++j) {
    const std::size_t n = subcarrier_of[j];
    if (n >= weights.n_subcarriers) ThrowInvalid("coordinate mapped to an unknown subcarrier");
    double s = 0.0;
    if (uniform[n]) {
      for (std::size_t i : live) s += updates[i][j];
      out[j] = server_lr * (s / m);
    } else {
      for (std::size_t i : live) s += weights.at(i, n) * updates[i][j];
      out[j] = server_lr * (s / total[n]);
    }
  }
  return out;
}

Evaluation Evaluate(const ModelSpec &spec, std::span<const double> weights,
                    const data::Dataset &test) {
  if (test.size() == 0) ThrowInvalid("evaluation on an empty test set");
  CheckSpec(spec);
  if (weights.size() != spec.ParameterCount()) ThrowInvalid("weight count does not match architecture");
  const Layers l = View(spec, weights.data());
  std::size_t correct = 0;
  double loss = 0.0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    const auto p = Forward(spec, l, test.sample(i), nullptr);
    const auto arg = static_cast<std::uint32_t>(std::max_element(p.begin(), p.end()) - p.begin());
    if (arg == test.labels[i]) ++correct;
    loss += CrossEntropy(p, test.labels[i]);
  }
  const double n = static_cast<double>(test.size());
  return {static_cast<double>(correct) / n, loss / n};
}

double EstimateHeterogeneity(std::span<const Objective *const> clients,
                             std::span<const double> w) {
  std::vector<ModelVector> grads;
  for (const Objective *c : clients) {
    ModelVector g(w.size());
    c->FullLossGrad(w, g);
    grads.push_back(std::move(g));
  }
  double best = 0.0;
  for (std::size_t a = 0; a < grads.size(); ++a)
    for (std::size_t b = a + 1; b < grads.size(); ++b) {
      double s = 0.0;
      for (std::size_t j = 0; j < w.size(); ++j) {
        const double d = grads[a][j] - grads[b][j];
        s += d * d;
      }
      best = std::max(best, std::sqrt(s));
    }
  return best;
}

double EstimateSmoothness(const Objective &objective, std::span<const double> w, Rng &rng,
                          std::size_t iterations) {
  const std::size_t d = w.size();
  std::normal_distribution<double> n01(0.0, 1.0);
  ModelVector v(d);
  for (double &x : v) x = n01(rng);
  auto normalize = [](ModelVector &x) {
    double s = 0.0;
    for (double e : x) s += e * e;
    s = std::sqrt(s);
    if (s > 0.0)
      for (double &e : x) e /= s;
    return s;
  };
  normalize(v);
  const double h = 1e-4;
  ModelVector wp(d), wm(d), gp(d), gm(d), hv(d);
  double lambda = 0.0;
  for (std::size_t it = 0; it < iterations; ++it) {
    for (std::size_t j = 0; j < d; ++j) {
      wp[j] = w[j] + h * v[j];
      wm[j] = w[j] - h * v[j];
    }
    objective.FullLossGrad(wp, gp);
    objective.FullLossGrad(wm, gm);
    for (std::size_t j = 0; j < d; ++j) hv[j] = (gp[j] - gm[j]) / (2.0 * h);
    lambda = normalize(hv);
    if (lambda == 0.0) break;
    v = hv;
  }
  return lambda;
}

double EstimateSgdVariance(const Objective &objective, std::span<const double> w,
                           std::size_t batch_size, Rng &rng, std::size_t draws) {
  const std::size_t n = objective.n_samples();
  if (n == 0 || draws == 0) ThrowInvalid("variance estimate needs samples and draws");
  const std::size_t b = std::min(std::max<std::size_t>(batch_size, 1), n);
  ModelVector full(w.size()), g(w.size());
  objective.FullLossGrad(w, full);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  double acc = 0.0;
  for (std::size_t t = 0; t < draws; ++t) {
    std::shuffle(order.begin(), order.end(), rng);
    objective.LossGrad(w, std::span<const std::size_t>(order.data(), b), g);
    for (std::size_t j = 0; j < w.size(); ++j) {
      const double d = g[j] - full[j];
      acc += d * d;
    }
  }
  return acc / static_cast<double>(draws);
}

}  // namespace thzfl::fl
