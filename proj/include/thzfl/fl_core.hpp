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

// Local training, server aggregation rules and evaluation.

#ifndef THZFL_FL_CORE_HPP_
#define THZFL_FL_CORE_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "thzfl/data_io.hpp"
#include "thzfl/link.hpp"
#include "thzfl/rng.hpp"

namespace thzfl::fl {

using link::ModelVector;

enum class Architecture { kLogistic, kMlp };

struct ModelSpec {
  Architecture architecture = Architecture::kMlp;
  std::size_t input_dim = 784;
  std::size_t hidden = 32;
  std::size_t n_classes = 10;

  std::size_t ParameterCount() const;
};

// He-style Gaussian init for weights, zero biases.
ModelVector InitWeights(const ModelSpec &spec, Rng &rng);

// Softmax class probabilities for one input.
std::vector<double> Predict(const ModelSpec &spec, std::span<const double> weights,
                            std::span<const double> input);

// Smooth empirical loss over indexed samples.
class Objective {
 public:
  virtual ~Objective() = default;
  virtual std::size_t dim() const = 0;
  virtual std::size_t n_samples() const = 0;
  // Mean loss over the batch; grad receives the mean gradient.
  virtual double LossGrad(std::span<const double> w, std::span<const std::size_t> batch,
                          std::span<double> grad) const = 0;

  double FullLossGrad(std::span<const double> w, std::span<double> grad) const;
};

// Softmax cross-entropy of a classifier on a dataset shard.
class ClassifierObjective final : public Objective {
 public:
  ClassifierObjective(ModelSpec spec, const data::Dataset &shard);
  std::size_t dim() const override { return spec_.ParameterCount(); }
  std::size_t n_samples() const override { return shard_->size(); }
  double LossGrad(std::span<const double> w, std::span<const std::size_t> batch,
                  std::span<double> grad) const override;

 private:
  ModelSpec spec_;
  const data::Dataset *shard_;
};

// (1/n) sum_s 0.5 (w - c_s)^T A (w - c_s) with a dense symmetric A.
class QuadraticObjective final : public Objective {
 public:
  QuadraticObjective(std::size_t dim, std::vector<double> hessian, std::vector<double> centres);
  static QuadraticObjective Isotropic(std::size_t dim);  // 0.5 ||w||^2

  std::size_t dim() const override { return dim_; }
  std::size_t n_samples() const override { return centres_.size() / dim_; }
  double LossGrad(std::span<const double> w, std::span<const std::size_t> batch,
                  std::span<double> grad) const override;

  const std::vector<double> &hessian() const { return hessian_; }
  std::vector<double> MeanCentre() const;

 private:
  std::size_t dim_;
  std::vector<double> hessian_;
  std::vector<double> centres_;
};

struct SgdSchedule {
  std::size_t steps = 1;
  double lr = 0.02;
  std::size_t batch_size = 32;
};

// K mini-batch steps over per-epoch reshuffles; returns w_K - w_0.
ModelVector LocalSgd(const Objective &objective, std::span<const double> w0,
                     const SgdSchedule &schedule, Rng &rng);

// server_lr * mean of the delivered updates, summed in ascending client order.
// An empty set yields the zero vector of length dim.
ModelVector AggregateUnweighted(std::span<const ModelVector> delivered, double server_lr,
                                std::size_t dim);

enum class AggregationMode { kUniform, kSnrWeighted };

// What the server knows about one scheduled client's link in a round.
struct ClientLinkView {
  bool delivered = false;
  std::span<const double> noise_vars;   // additive term after equalization
  std::span<const double> jitter_vars;  // multiplicative variance
  std::span<const double> omega;        // quantizer variance bound
};

struct AggregationWeights {
  std::size_t n_clients = 0;
  std::size_t n_subcarriers = 0;
  std::vector<double> alpha;  // client-major, normalized per subcarrier over delivered clients
  std::vector<bool> delivered;

  double at(std::size_t client, std::size_t subcarrier) const {
    return alpha[client * n_subcarriers + subcarrier];
  }
  // Subcarrier-average of each client's normalized weight.
  std::vector<double> ClientAverages() const;
};

inline constexpr double kWeightFloor = 1e-6;

AggregationWeights ComputeWeights(std::span<const ClientLinkView> clients,
                                  std::size_t n_subcarriers, AggregationMode mode,
                                  double weight_floor = kWeightFloor);

// Per-subcarrier weighted mean. updates[i] pairs with client i of the weights;
// subcarrier_of[j] names the subcarrier coordinate j travelled on.
ModelVector AggregateWeighted(std::span<const ModelVector> updates,
                              const AggregationWeights &weights,
                              std::span<const std::uint32_t> subcarrier_of, double server_lr);

struct Evaluation {
  double accuracy = 0.0;
  double loss = 0.0;
};

Evaluation Evaluate(const ModelSpec &spec, std::span<const double> weights,
                    const data::Dataset &test);

// Empirical constants for the analysis toolkit.
double EstimateHeterogeneity(std::span<const Objective *const> clients,
                             std::span<const double> w);
double EstimateSmoothness(const Objective &objective, std::span<const double> w, Rng &rng,
                          std::size_t iterations = 20);
double EstimateSgdVariance(const Objective &objective, std::span<const double> w,
                           std::size_t batch_size, Rng &rng, std::size_t draws = 16);

}  // namespace thzfl::fl

#endif  // THZFL_FL_CORE_HPP_
