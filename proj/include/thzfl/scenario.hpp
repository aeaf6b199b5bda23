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

// Scenario configuration, presets, the round loop and result emission.

#ifndef THZFL_SCENARIO_HPP_
#define THZFL_SCENARIO_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "thzfl/analysis.hpp"
#include "thzfl/channel.hpp"
#include "thzfl/fl_core.hpp"
#include "thzfl/link.hpp"

namespace thzfl::scenario {

inline constexpr int kSchemaVersion = 1;

// Geometry as written in a config file: angles in radians.
struct GeometryConfig {
  double distance_m = 10.0;
  double user_angle_rad = kPi / 6.0;
  double steer_angle_rad = kPi / 6.0;
  std::size_t n_antennas = 64;
  double antenna_spacing_m = 0.0;
  double squint_severity = 1.0;
  double jitter_std_rad = 0.0;
  double fading_var = 0.0;
  double tx_power_w = 1.0;

  channel::LinkGeometry ToLinkGeometry() const;
};

struct PhysicsConfig {
  double center_freq_hz = 300e9;
  double bandwidth_hz = 10e9;
  std::size_t n_subcarriers = 128;
  double noise_temp_k = 290.0;
  double absorption_per_m = channel::kDefaultAbsorptionPerM;
  std::string absorption_table;  // CSV path; overrides absorption_per_m when set
  double erasure_threshold = 0.01;
  channel::PowerAllocation power_allocation = channel::PowerAllocation::kUniform;
  GeometryConfig geometry;
  // Optional per-client geometry; when non-empty its length must equal n_clients.
  std::vector<GeometryConfig> client_geometries;
};

struct DataConfig {
  std::string source = "synthetic";  // synthetic | idx
  std::string train_images, train_labels, test_images, test_labels;
  std::size_t n_train = 2000;
  std::size_t n_test = 1000;
  std::size_t input_dim = 784;
  std::size_t n_classes = 10;
  double separation = 80.0;
  data::ShardStrategy shard = data::ShardStrategy::kIid;
  double dirichlet_beta = 0.5;
};

struct FlConfig {
  fl::Architecture architecture = fl::Architecture::kMlp;
  std::size_t hidden = 32;
  double lr_local = 0.02;
  std::size_t batch_size = 32;
  std::size_t local_epochs = 1;
  std::size_t rounds = 10;
  std::size_t n_clients = 10;
  std::size_t clients_per_round = 0;  // 0 means full participation
  double server_lr = 1.0;
  fl::AggregationMode aggregation = fl::AggregationMode::kUniform;
};

struct LinkConfig {
  unsigned bits = 0;  // 0 disables quantization
  std::size_t pilot_window = 4;
  std::size_t pilot_length = 64;
  double floor_relative = 1e-3;
  std::optional<double> floor_absolute;
  bool interleaving = true;
  bool compensation = true;
  bool pilot_shares_fading = true;
  bool exact_csi = false;  // hand the receiver the true mean gains
  bool transparent = false;  // unit gains, no noise, no erasure
};

struct AnalysisConfig {
  std::optional<double> L, G, sigma_sgd, f_gap;
  double c0 = 1.0, c1 = 1.0, c2 = 1.0, c3 = 1.0;
  double a1 = 8.0, a2 = 2.0, a3 = 8.0;
  double epsilon = 0.1;
  double kappa = 0.0;  // <= 0 means d_sub
};

struct ScenarioConfig {
  std::string name = "custom";
  std::uint64_t seed = 1;
  PhysicsConfig physics;
  DataConfig data;
  FlConfig fl;
  LinkConfig link;
  AnalysisConfig analysis;

  std::size_t participants() const {
    return fl.clients_per_round == 0 ? fl.n_clients : fl.clients_per_round;
  }
  fl::ModelSpec model() const;
};

// Every key is optional; missing keys take the defaults above. Unknown keys,
// wrong types and out-of-range values are all collected into one ConfigError.
ScenarioConfig ParseConfig(const std::string &json_text);
ScenarioConfig LoadConfig(const std::string &path);
void Validate(const ScenarioConfig &config);  // throws ConfigError
std::string ToJson(const ScenarioConfig &config, int indent = 2);

struct RoundRecord {
  std::size_t round = 0;
  double accuracy = 0.0;
  double loss = 0.0;
  std::vector<int> delivered;  // per client; -1 when not scheduled
  std::size_t n_delivered = 0;
  double mean_snr_db = 0.0;
  double harmonic_snr_db = 0.0;
  double erasure_rate = 0.0;
  std::size_t excluded_subcarriers = 0;
  double comm_error_energy = 0.0;
  double comm_bound = 0.0;
  std::vector<double> client_weights;
  double bias_floor = 0.0;
  std::string warning;
};

struct RunSummary {
  std::string name;
  std::vector<RoundRecord> records;
  double final_accuracy = 0.0;
  double initial_accuracy = 0.0;
  double G = 0.0;
  std::vector<double> final_weights;
};

struct RunOptions {
  std::size_t workers = 1;
};

RunSummary RunScenario(const ScenarioConfig &config, const RunOptions &options = {});

// Design report for the configured links and schedule, with constants
// estimated at the initial model unless overridden.
analysis::DesignReport DesignCheck(const ScenarioConfig &config);

enum class OutputFormat { kCsv, kJson };
std::string CsvHeader();
std::string ToCsv(const std::vector<RoundRecord> &records);
std::string ToJsonRecords(const std::vector<RoundRecord> &records, int indent = 2);
void EmitResults(const std::vector<RoundRecord> &records, const std::string &path,
                 OutputFormat format);
std::vector<RoundRecord> ParseCsv(const std::string &text);

struct PresetVariant {
  std::string label;
  ScenarioConfig config;
};

const std::vector<std::string> &PresetNames();
std::vector<PresetVariant> Preset(const std::string &name);  // throws kUnknownPreset

}  // namespace thzfl::scenario

#endif  // THZFL_SCENARIO_HPP_
