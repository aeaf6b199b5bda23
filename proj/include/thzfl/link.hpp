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

// Uplink transformation of one model update: interleave, partition onto
// subcarriers, quantize, pass through the channel, estimate gains from pilots
// and undo the per-subcarrier gain at the server.
//
// Units: a block is sent as unit-energy symbols, so its additive noise is
// scaled by the block RMS (carried in symbol_scale). noise_vars from
// LinkStatistics is therefore a noise-to-signal ratio per coordinate after
// ideal equalization; in received units the per-coordinate variance is
// mean_gain^2 * symbol_scale^2 * noise_var.

#ifndef THZFL_LINK_HPP_
#define THZFL_LINK_HPP_

#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <vector>

#include "thzfl/channel.hpp"
#include "thzfl/rng.hpp"

namespace thzfl::link {

using ModelVector = std::vector<double>;

class SubcarrierPayload {
 public:
  SubcarrierPayload() = default;
  SubcarrierPayload(std::size_t n_blocks, std::size_t block_len, std::size_t source_len);

  std::size_t n_blocks() const { return n_blocks_; }
  std::size_t block_len() const { return block_len_; }
  std::size_t source_len() const { return source_len_; }
  std::size_t pad_len() const { return n_blocks_ * block_len_ - source_len_; }

  std::span<double> block(std::size_t n) { return {data_.data() + n * block_len_, block_len_}; }
  std::span<const double> block(std::size_t n) const {
    return {data_.data() + n * block_len_, block_len_};
  }
  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  // RMS of each block as transmitted; 1 unless the sender normalizes.
  std::vector<double> symbol_scale;

 private:
  std::size_t n_blocks_ = 0;
  std::size_t block_len_ = 0;
  std::size_t source_len_ = 0;
  std::vector<double> data_;
};

struct ReceivedPayload {
  bool erased = true;
  SubcarrierPayload payload;
};

// Contiguous split into equal blocks of ceil(d / n) with zero padding at the tail.
SubcarrierPayload Partition(std::span<const double> values, std::size_t n_subcarriers);
ModelVector Reassemble(const SubcarrierPayload &payload);

// Sets symbol_scale[n] to the RMS of block n.
void NormalizeSymbolEnergy(SubcarrierPayload &payload);

// Uniform random permutation of 0..d-1 derived from the seed.
std::vector<std::uint32_t> MakePermutation(std::size_t d, std::uint64_t seed);
ModelVector Interleave(std::span<const double> values, std::uint64_t permutation_seed);
ModelVector Deinterleave(std::span<const double> values, std::uint64_t permutation_seed);

struct QuantizerSpec {
  std::vector<unsigned> bits_per_subcarrier;  // 0 disables quantization on that subcarrier
  std::vector<double> omega_bound;

  static QuantizerSpec Uniform(std::size_t n_subcarriers, unsigned bits, std::size_t d_sub);
  double MeanOmega() const;
};

// min{d_sub / 2^(2b), 1}; 0 when quantization is off (b == 0).
double QsgdOmega(std::size_t d_sub, unsigned bits);

// Unbiased stochastic rounding of |x_i| / max|x| onto 2^bits uniform levels.
std::vector<double> QsgdQuantize(std::span<const double> block, unsigned bits, Rng &rng);
void QuantizePayload(SubcarrierPayload &payload, const QuantizerSpec &spec, Rng &rng);

// Applies the channel: gains[n] * block + Gaussian noise, or an erasure.
ReceivedPayload Transmit(const SubcarrierPayload &payload,
                         const channel::ChannelRealization &realization,
                         const channel::LinkStatistics &stats, Rng &rng);

// <received, sent> / ||sent||^2
double PilotStatistic(std::span<const double> received_pilot, std::span<const double> sent_pilot);

// One pilot exchange per subcarrier. Pilot symbols are +-1 with the data's
// noise level; an erased round returns zeros on every subcarrier.
std::vector<double> ExchangePilots(Rng &rng, const channel::LinkStatistics &stats,
                                   std::span<const double> gains, bool delivered,
                                   std::size_t pilot_length);

struct FloorPolicy {
  double relative_to_median = 1e-3;
  std::optional<double> absolute;  // overrides the relative rule when set
};

class GainEstimator {
 public:
  GainEstimator() = default;
  GainEstimator(std::size_t n_subcarriers, std::size_t window, FloorPolicy floor = {});

  void Update(std::span<const double> statistics);

  std::size_t window() const { return window_; }
  std::size_t n_subcarriers() const { return estimates_.size(); }
  std::size_t samples() const { return history_.size(); }
  const std::vector<double> &estimates() const { return estimates_; }
  const std::vector<bool> &excluded() const { return excluded_; }
  double floor_delta() const { return floor_delta_; }
  std::size_t excluded_count() const;

  // Fixed estimates; used when the receiver is handed exact CSI.
  void Override(std::vector<double> estimates);

 private:
  void Refresh();

  std::size_t window_ = 1;
  FloorPolicy floor_;
  std::deque<std::vector<double>> history_;
  std::vector<double> estimates_;
  std::vector<bool> excluded_;
  double floor_delta_ = 0.0;
};

enum class Equalization { kEstimated, kNone };

struct CompensatedUpdate {
  ModelVector values;  // reassembled, deinterleaved, padding stripped
  std::size_t excluded_subcarriers = 0;
};

// Divides block n by the estimate, zeroes excluded blocks, then undoes the
// partition and (if a seed is given) the interleaving.
CompensatedUpdate Compensate(const ReceivedPayload &received, const GainEstimator &estimator,
                             Equalization mode = Equalization::kEstimated,
                             std::optional<std::uint64_t> permutation_seed = std::nullopt);

// Subcarrier index carried by each source coordinate under the given layout.
std::vector<std::uint32_t> SubcarrierOfCoordinate(std::size_t d, std::size_t n_subcarriers,
                                                  std::optional<std::uint64_t> permutation_seed);

}  // namespace thzfl::link

#endif  // THZFL_LINK_HPP_
