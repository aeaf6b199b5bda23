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

#ifndef THZFL_RNG_HPP_
#define THZFL_RNG_HPP_

#include <cstdint>
#include <random>

namespace thzfl {

using Rng = std::mt19937_64;

// Purpose tags keep substreams for different consumers disjoint.
enum class Stream : std::uint64_t {
  kModelInit = 1,
  kData,
  kShard,
  kSampling,
  kLocalSgd,
  kInterleave,
  kQuantize,
  kChannel,
  kPilot,
  kNoise,
  kTest,
};

inline constexpr std::uint64_t kServerId = 0xffffffffull;

inline std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Deterministic substream keyed on (master_seed, client, round, purpose).
inline Rng Substream(std::uint64_t master_seed, std::uint64_t client, std::uint64_t round,
                     Stream purpose) {
  std::uint64_t h = SplitMix64(master_seed);
  h = SplitMix64(h ^ (client * 0xd1342543de82ef95ull));
  h = SplitMix64(h ^ (round * 0xa0761d6478bd642full + 1));
  h = SplitMix64(h ^ static_cast<std::uint64_t>(purpose));
  std::seed_seq seq{static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
  return Rng(seq);
}

}  // namespace thzfl

#endif  // THZFL_RNG_HPP_
