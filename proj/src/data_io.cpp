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

#include "thzfl/data_io.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numeric>

namespace thzfl::data {

void Dataset::Validate() const {
  if (input_dim == 0) ThrowInvalid("dataset: input_dim must be > 0");
  if (features.size() != labels.size() * input_dim) ThrowInvalid("dataset: length mismatch");
  for (auto l : labels) {
    if (l >= n_classes) ThrowInvalid("dataset: label out of range");
  }
  for (double v : features) {
    if (!(v >= 0.0 && v <= 1.0)) ThrowInvalid("dataset: feature outside [0, 1]");
  }
}

Dataset Dataset::Subset(std::span<const std::size_t> indices) const {
  Dataset out;
  out.input_dim = input_dim;
  out.n_classes = n_classes;
  out.features.reserve(indices.size() * input_dim);
  out.labels.reserve(indices.size());
  for (auto i : indices) {
    auto s = sample(i);
    out.features.insert(out.features.end(), s.begin(), s.end());
    out.labels.push_back(labels[i]);
  }
  return out;
}

namespace {

std::vector<unsigned char> ReadAll(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t BigEndian32(const std::vector<unsigned char> &buf, std::size_t offset,
                          const std::string &path) {
  if (buf.size() < offset + 4) throw Error(ErrorCode::kTruncatedFile, "truncated header: " + path);
  return (std::uint32_t{buf[offset]} << 24) | (std::uint32_t{buf[offset + 1]} << 16) |
         (std::uint32_t{buf[offset + 2]} << 8) | std::uint32_t{buf[offset + 3]};
}

void PutBigEndian32(std::ostream &out, std::uint32_t v) {
  const std::array<char, 4> b{static_cast<char>(v >> 24), static_cast<char>(v >> 16),
                              static_cast<char>(v >> 8), static_cast<char>(v)};
  out.write(b.data(), 4);
}

}  // namespace

Dataset LoadIdx(const std::string &images_path, const std::string &labels_path) {
  const auto img = ReadAll(images_path);
  const auto lab = ReadAll(labels_path);

  const std::uint32_t img_magic = BigEndian32(img, 0, images_path);
  if (img_magic != kIdxImageMagic) {
    throw Error(ErrorCode::kBadMagic, "bad image magic in " + images_path);
  }
  const std::uint32_t lab_magic = BigEndian32(lab, 0, labels_path);
  if (lab_magic != kIdxLabelMagic) {
    throw Error(ErrorCode::kBadMagic, "bad label magic in " + labels_path);
  }
  const std::size_t n_img = BigEndian32(img, 4, images_path);
  const std::size_t rows = BigEndian32(img, 8, images_path);
  const std::size_t cols = BigEndian32(img, 12, images_path);
  const std::size_t n_lab = BigEndian32(lab, 4, labels_path);
  if (n_img != n_lab) {
    throw Error(ErrorCode::kCountMismatch, "image/label count mismatch: " +
                                               std::to_string(n_img) + " vs " +
                                               std::to_string(n_lab));
  }
  const std::size_t dim = rows * cols;
  if (img.size() < 16 + n_img * dim) {
    throw Error(ErrorCode::kTruncatedFile, "truncated image data: " + images_path);
  }
  if (lab.size() < 8 + n_lab) {
    throw Error(ErrorCode::kTruncatedFile, "truncated label data: " + labels_path);
  }

  Dataset ds;
  ds.input_dim = dim;
  ds.features.resize(n_img * dim);
  for (std::size_t i = 0; i < n_img * dim; ++i) ds.features[i] = img[16 + i] / 255.0;
  ds.labels.resize(n_lab);
  std::uint32_t max_label = 0;
  for (std::size_t i = 0; i < n_lab; ++i) {
    ds.labels[i] = lab[8 + i];
    max_label = std::max(max_label, ds.labels[i]);
  }
  ds.n_classes = std::max<std::size_t>(10, max_label + 1);
  return ds;
}

void WriteIdx(const Dataset &dataset, std::size_t rows, std::size_t cols,
              const std::string &images_path, const std::string &labels_path) {
  if (rows * cols != dataset.input_dim) ThrowInvalid("write_idx: rows*cols != input_dim");
  std::ofstream img(images_path, std::ios::binary);
  std::ofstream lab(labels_path, std::ios::binary);
  if (!img || !lab) throw Error(ErrorCode::kIo, "cannot write IDX files");
  PutBigEndian32(img, kIdxImageMagic);
  PutBigEndian32(img, static_cast<std::uint32_t>(dataset.size()));
  PutBigEndian32(img, static_cast<std::uint32_t>(rows));
  PutBigEndian32(img, static_cast<std::uint32_t>(cols));
  for (double v : dataset.features) {
    img.put(static_cast<char>(static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0))));
  }
  PutBigEndian32(lab, kIdxLabelMagic);
  PutBigEndian32(lab, static_cast<std::uint32_t>(dataset.size()));
  for (auto l : dataset.labels) lab.put(static_cast<char>(l));
  if (!img || !lab) throw Error(ErrorCode::kIo, "error writing IDX files");
}

Dataset SyntheticDataset(std::size_t n_samples, std::size_t input_dim, std::size_t n_classes,
                         double separation, Rng &rng) {
  if (n_classes < 2) ThrowInvalid("synthetic: n_classes must be >= 2");
  if (input_dim < 1) ThrowInvalid("synthetic: input_dim must be >= 1");
  constexpr double kSigma = 0.15;
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> centres(n_classes * input_dim);
  for (std::size_t c = 0; c < n_classes; ++c) {
    double norm = 0.0;
    auto *row = centres.data() + c * input_dim;
    for (std::size_t j = 0; j < input_dim; ++j) {
      row[j] = gauss(rng);
      norm += row[j] * row[j];
    }
    norm = std::sqrt(norm);
    for (std::size_t j = 0; j < input_dim; ++j) {
      row[j] = 0.5 + 0.5 * separation * kSigma * row[j] / norm;
    }
  }
  Dataset ds;
  ds.input_dim = input_dim;
  ds.n_classes = n_classes;
  ds.features.resize(n_samples * input_dim);
  ds.labels.resize(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) {
    const auto c = static_cast<std::uint32_t>(i % n_classes);
    ds.labels[i] = c;
    const auto *mu = centres.data() + c * input_dim;
    for (std::size_t j = 0; j < input_dim; ++j) {
      ds.features[i * input_dim + j] = std::clamp(mu[j] + kSigma * gauss(rng), 0.0, 1.0);
    }
  }
  return ds;
}

Dataset Subsample(const Dataset &dataset, std::size_t n, Rng &rng) {
  if (n >= dataset.size()) return dataset;
  std::vector<std::size_t> idx(dataset.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::shuffle(idx.begin(), idx.end(), rng);
  idx.resize(n);
  std::sort(idx.begin(), idx.end());
  return dataset.Subset(idx);
}

std::vector<std::vector<std::size_t>> ShardPlan::Members() const {
  std::vector<std::vector<std::size_t>> out(n_clients);
  for (std::size_t i = 0; i < assignment.size(); ++i) out[assignment[i]].push_back(i);
  return out;
}

ShardPlan Shard(const Dataset &dataset, std::size_t n_clients, const ShardSpec &spec, Rng &rng) {
  if (n_clients < 1) ThrowInvalid("shard: n_clients must be >= 1");
  if (n_clients > dataset.size()) ThrowInvalid("shard: more clients than samples");
  if (spec.strategy == ShardStrategy::kDirichlet && !(spec.dirichlet_beta > 0.0)) {
    ThrowInvalid("shard: dirichlet beta must be > 0");
  }
  ShardPlan plan;
  plan.n_clients = n_clients;
  plan.strategy = spec.strategy;
  plan.assignment.resize(dataset.size());

  constexpr int kMaxAttempts = 100;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    if (spec.strategy == ShardStrategy::kIid) {
      std::uniform_int_distribution<std::uint32_t> pick(0, static_cast<std::uint32_t>(n_clients - 1));
      for (auto &a : plan.assignment) a = pick(rng);
    } else {
      std::gamma_distribution<double> gamma(spec.dirichlet_beta, 1.0);
      std::vector<std::vector<double>> proportions(dataset.n_classes,
                                                   std::vector<double>(n_clients));
      for (auto &p : proportions) {
        for (auto &v : p) v = gamma(rng);
        if (std::accumulate(p.begin(), p.end(), 0.0) <= 0.0) std::fill(p.begin(), p.end(), 1.0);
      }
      for (std::size_t i = 0; i < dataset.size(); ++i) {
        const auto &p = proportions[dataset.labels[i]];
        std::discrete_distribution<std::uint32_t> pick(p.begin(), p.end());
        plan.assignment[i] = pick(rng);
      }
    }
    std::vector<std::size_t> counts(n_clients, 0);
    for (auto a : plan.assignment) ++counts[a];
    if (std::find(counts.begin(), counts.end(), std::size_t{0}) == counts.end()) return plan;
  }
  ThrowInvalid("shard: a client received no samples after 100 attempts");
}

void WriteShardCsv(const ShardPlan &plan, const std::string &path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  out << "sample_index,client_id\n";
  for (std::size_t i = 0; i < plan.assignment.size(); ++i) {
    out << i << ',' << plan.assignment[i] << '\n';
  }
  if (!out) throw Error(ErrorCode::kIo, "error writing " + path);
}

}  // namespace thzfl::data
