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

#ifndef THZFL_DATA_IO_HPP_
#define THZFL_DATA_IO_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "thzfl/common.hpp"
#include "thzfl/rng.hpp"

namespace thzfl::data {

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

// Row-major features in [0, 1] with integer class labels.
struct Dataset {
  std::size_t input_dim = 0;
  std::size_t n_classes = 0;
  std::vector<double> features;
  std::vector<std::uint32_t> labels;

  std::size_t size() const { return labels.size(); }
  std::span<const double> sample(std::size_t i) const {
    return {features.data() + i * input_dim, input_dim};
  }
  void Validate() const;
  Dataset Subset(std::span<const std::size_t> indices) const;
};

// Standard big-endian MNIST layout; pixels scaled by 1/255.
Dataset LoadIdx(const std::string &images_path, const std::string &labels_path);
// Inverse of LoadIdx; features are rounded to the nearest byte.
void WriteIdx(const Dataset &dataset, std::size_t rows, std::size_t cols,
              const std::string &images_path, const std::string &labels_path);

// Gaussian class blobs clipped to [0, 1]. Class centres sit separation * sigma / 2
// away from 0.5 along random unit directions.
Dataset SyntheticDataset(std::size_t n_samples, std::size_t input_dim, std::size_t n_classes,
                         double separation, Rng &rng);

// Deterministic subsample without replacement, preserving original order.
Dataset Subsample(const Dataset &dataset, std::size_t n, Rng &rng);

enum class ShardStrategy { kIid, kDirichlet };

struct ShardSpec {
  ShardStrategy strategy = ShardStrategy::kIid;
  double dirichlet_beta = 0.5;
};

struct ShardPlan {
  std::size_t n_clients = 0;
  ShardStrategy strategy = ShardStrategy::kIid;
  std::vector<std::uint32_t> assignment;  // sample index -> client id

  std::vector<std::vector<std::size_t>> Members() const;
};

ShardPlan Shard(const Dataset &dataset, std::size_t n_clients, const ShardSpec &spec, Rng &rng);

// sample_index,client_id
void WriteShardCsv(const ShardPlan &plan, const std::string &path);

}  // namespace thzfl::data

#endif  // THZFL_DATA_IO_HPP_
