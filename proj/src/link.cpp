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

#include "thzfl/link.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace thzfl::link {

SubcarrierPayload::SubcarrierPayload(std::size_t n_blocks, std::size_t block_len,
                                     std::size_t source_len)
    : symbol_scale(n_blocks, 1.0),
      n_blocks_(n_blocks),
      block_len_(block_len),
      source_len_(source_len),
      data_(n_blocks * block_len, 0.0) {}

SubcarrierPayload Partition(std::span<const double> values, std::size_t n_subcarriers) {
  if (n_subcarriers < 1) ThrowInvalid("partition: n_subcarriers must be >= 1");
  if (values.empty()) ThrowInvalid("partition: empty vector");
  const std::size_t d_sub = (values.size() + n_subcarriers - 1) / n_subcarriers;
  SubcarrierPayload p(n_subcarriers, d_sub, values.size());
  std::copy(values.begin(), values.end(), p.data().begin());
  return p;
}

ModelVector Reassemble(const SubcarrierPayload &payload) {
  auto data = payload.data();
  return ModelVector(data.begin(), data.begin() + static_cast<std::ptrdiff_t>(payload.source_len()));
}

void NormalizeSymbolEnergy(SubcarrierPayload &payload) {
  for (std::size_t n = 0; n < payload.n_blocks(); ++n) {
    auto b = payload.block(n);
    double e = 0.0;
    for (double v : b) e += v * v;
    payload.symbol_scale[n] = std::sqrt(e / static_cast<double>(b.size()));
  }
}

std::vector<std::uint32_t> MakePermutation(std::size_t d, std::uint64_t seed) {
  std::vector<std::uint32_t> perm(d);
  std::iota(perm.begin(), perm.end(), 0u);
  Rng rng(SplitMix64(seed));
  std::shuffle(perm.begin(), perm.end(), rng);
  return perm;
}

ModelVector Interleave(std::span<const double> values, std::uint64_t permutation_seed) {
  const auto perm = MakePermutation(values.size(), permutation_seed);
  ModelVector out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = values[perm[i]];
  return out;
}

ModelVector Deinterleave(std::span<const double> values, std::uint64_t permutation_seed) {
  const auto perm = MakePermutation(values.size(), permutation_seed);
  ModelVector out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) out[perm[i]] = values[i];
  return out;
}

double QsgdOmega(std::size_t d_sub, unsigned bits) {
  if (bits == 0) return 0.0;
  return std::min(std::ldexp(static_cast<double>(d_sub), -2 * static_cast<int>(bits)), 1.0);
}

QuantizerSpec QuantizerSpec::Uniform(std::size_t n_subcarriers, unsigned bits, std::size_t d_sub) {
  QuantizerSpec q;
  q.bits_per_subcarrier.assign(n_subcarriers, bits);
  q.omega_bound.assign(n_subcarriers, QsgdOmega(d_sub, bits));
  return q;
}

double QuantizerSpec::MeanOmega() const {
  if (omega_bound.empty()) return 0.0;
  return std::accumulate(omega_bound.begin(), omega_bound.end(), 0.0) /
         static_cast<double>(omega_bound.size());
}

std::vector<double> QsgdQuantize(std::span<const double> block, unsigned bits, Rng &rng) {
  std::vector<double> out(block.begin(), block.end());
  if (bits == 0) return out;
  double scale = 0.0;
  for (double v : block) scale = std::max(scale, std::abs(v));
  if (scale == 0.0) return out;
  const double levels = std::ldexp(1.0, static_cast<int>(std::min(bits, 52u)));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (double &v : out) {
    const double r = std::abs(v) / scale * levels;
    double l = std::floor(r);
    if (u(rng) < r - l) l += 1.0;
    v = std::copysign(l / levels * scale, v);
  }
  return out;
}

void QuantizePayload(SubcarrierPayload &payload, const QuantizerSpec &spec, Rng &rng) {
  for (std::size_t n = 0; n < payload.n_blocks(); ++n) {
    const unsigned bits = spec.bits_per_subcarrier.empty() ? 0u : spec.bits_per_subcarrier[n];
    if (bits == 0) continue;
    auto b = payload.block(n);
    auto q = QsgdQuantize(b, bits, rng);
    std::copy(q.begin(), q.end(), b.begin());
  }
}

namespace {
double ReceivedNoiseStd(const channel::LinkStatistics &stats, std::size_t n, double scale) {
  const double v = stats.mean_gains[n] * stats.mean_gains[n] * stats.noise_vars[n];
  if (!(v > 0.0) || !std::isfinite(v)) return 0.0;
  return scale * std::sqrt(v);
}
}  // namespace

ReceivedPayload Transmit(const SubcarrierPayload &payload,
                         const channel::ChannelRealization &realization,
                         const channel::LinkStatistics &stats, Rng &rng) {
  if (payload.n_blocks() != stats.size() || realization.gains.size() != stats.size()) {
    ThrowInvalid("transmit: payload block count does not match the subcarrier count");
  }
  ReceivedPayload out;
  if (!realization.delivered) return out;
  out.erased = false;
  out.payload = payload;
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (std::size_t n = 0; n < payload.n_blocks(); ++n) {
    const double h = realization.gains[n];
    const double sd = ReceivedNoiseStd(stats, n, payload.symbol_scale[n]);
    for (double &v : out.payload.block(n)) {
      v *= h;
      if (sd > 0.0) v += sd * gauss(rng);
    }
  }
  return out;
}

double PilotStatistic(std::span<const double> received_pilot, std::span<const double> sent_pilot) {
  if (received_pilot.size() != sent_pilot.size()) ThrowInvalid("pilot: length mismatch");
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < sent_pilot.size(); ++i) {
    num += received_pilot[i] * sent_pilot[i];
    den += sent_pilot[i] * sent_pilot[i];
  }
  if (!(den > 0.0)) ThrowInvalid("pilot: sent pilot has zero norm");
  return num / den;
}

std::vector<double> ExchangePilots(Rng &rng, const channel::LinkStatistics &stats,
                                   std::span<const double> gains, bool delivered,
                                   std::size_t pilot_length) {
  if (pilot_length < 1) ThrowInvalid("pilot: length must be >= 1");
  const std::size_t n_sub = stats.size();
  std::vector<double> z(n_sub, 0.0);
  std::vector<double> sent(pilot_length);
  std::vector<double> received(pilot_length);
  std::bernoulli_distribution sign(0.5);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (std::size_t n = 0; n < n_sub; ++n) {
    const double sd = ReceivedNoiseStd(stats, n, 1.0);
    for (std::size_t k = 0; k < pilot_length; ++k) {
      sent[k] = sign(rng) ? 1.0 : -1.0;
      const double noise = sd > 0.0 ? sd * gauss(rng) : 0.0;
      received[k] = delivered ? gains[n] * sent[k] + noise : 0.0;
    }
    z[n] = PilotStatistic(received, sent);
  }
  return z;
}

GainEstimator::GainEstimator(std::size_t n_subcarriers, std::size_t window, FloorPolicy floor)
    : window_(window), floor_(floor), estimates_(n_subcarriers, 0.0),
      excluded_(n_subcarriers, true) {
  if (window < 1) ThrowInvalid("gain estimator: window must be >= 1");
}

void GainEstimator::Update(std::span<const double> statistics) {
  if (statistics.size() != estimates_.size()) ThrowInvalid("gain estimator: length mismatch");
  history_.emplace_back(statistics.begin(), statistics.end());
  while (history_.size() > window_) history_.pop_front();
  std::fill(estimates_.begin(), estimates_.end(), 0.0);
  for (const auto &row : history_) {
    for (std::size_t n = 0; n < row.size(); ++n) estimates_[n] += row[n];
  }
  const double m = static_cast<double>(history_.size());
  for (double &e : estimates_) e /= m;
  Refresh();
}

void GainEstimator::Override(std::vector<double> estimates) {
  if (estimates.size() != estimates_.size()) ThrowInvalid("gain estimator: length mismatch");
  estimates_ = std::move(estimates);
  Refresh();
}

void GainEstimator::Refresh() {
  if (estimates_.empty()) return;
  if (floor_.absolute) {
    floor_delta_ = *floor_.absolute;
  } else {
    std::vector<double> sorted = estimates_;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t mid = sorted.size() / 2;
    const double median =
        sorted.size() % 2 == 1 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
    floor_delta_ = floor_.relative_to_median * median;
  }
  // Never divide by a non-positive estimate.
  floor_delta_ = std::max(floor_delta_, std::numeric_limits<double>::min());
  for (std::size_t n = 0; n < estimates_.size(); ++n) {
    excluded_[n] = !(estimates_[n] >= floor_delta_);
  }
}

std::size_t GainEstimator::excluded_count() const {
  return static_cast<std::size_t>(std::count(excluded_.begin(), excluded_.end(), true));
}

CompensatedUpdate Compensate(const ReceivedPayload &received, const GainEstimator &estimator,
                             Equalization mode, std::optional<std::uint64_t> permutation_seed) {
  if (received.erased) ThrowInvalid("compensate: payload was erased");
  SubcarrierPayload p = received.payload;
  if (mode == Equalization::kEstimated && estimator.n_subcarriers() != p.n_blocks()) {
    ThrowInvalid("compensate: estimator size does not match the payload");
  }
  CompensatedUpdate out;
  if (mode == Equalization::kEstimated) {
    const auto &est = estimator.estimates();
    const auto &excl = estimator.excluded();
    for (std::size_t n = 0; n < p.n_blocks(); ++n) {
      auto b = p.block(n);
      if (excl[n]) {
        std::fill(b.begin(), b.end(), 0.0);
        ++out.excluded_subcarriers;
      } else if (est[n] != 1.0) {
        for (double &v : b) v /= est[n];
      }
    }
  }
  out.values = Reassemble(p);
  if (permutation_seed) out.values = Deinterleave(out.values, *permutation_seed);
  return out;
}

std::vector<std::uint32_t> SubcarrierOfCoordinate(std::size_t d, std::size_t n_subcarriers,
                                                  std::optional<std::uint64_t> permutation_seed) {
  if (n_subcarriers < 1) ThrowInvalid("layout: n_subcarriers must be >= 1");
  const std::size_t d_sub = (d + n_subcarriers - 1) / n_subcarriers;
  std::vector<std::uint32_t> map(d);
  if (!permutation_seed) {
    for (std::size_t j = 0; j < d; ++j) map[j] = static_cast<std::uint32_t>(j / d_sub);
    return map;
  }
  const auto perm = MakePermutation(d, *permutation_seed);
  for (std::size_t i = 0; i < d; ++i) map[perm[i]] = static_cast<std::uint32_t>(i / d_sub);
  return map;
}

}  // namespace thzfl::link
