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

// Named experiment families. Each preset pins the swept quantity to the
// published sweep values; everything not stated there (geometry, distances,
// dataset difficulty) is a desk-scale choice kept in Base() or in the preset.

#include <cstdio>

#include "thzfl/scenario.hpp"

namespace thzfl::scenario {

namespace {

ScenarioConfig Base(const std::string &name) {
  ScenarioConfig c;
  c.name = name;
  c.seed = 20260101;
  return c;
}

std::string Label(const char *fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

std::vector<PresetVariant> PowerSweep() {
  std::vector<PresetVariant> out;
  for (double p : {1e-4, 1e-2, 1.0}) {
    auto c = Base("power_sweep");
    c.physics.geometry.tx_power_w = p;
    out.push_back({Label("P=%gW", p), c});
  }
  return out;
}

std::vector<PresetVariant> Squint() {
  std::vector<PresetVariant> out;
  for (double s : {1.0, 3.0, 5.0}) {
    auto c = Base("squint");
    c.physics.geometry.squint_severity = s;
    c.physics.geometry.tx_power_w = 1e-2;
    out.push_back({Label("s=%g", s), c});
  }
  return out;
}

std::vector<PresetVariant> Jitter() {
  std::vector<PresetVariant> out;
  for (double j : {0.0, 0.2, 0.4, 0.5, 0.8}) {
    auto c = Base("jitter");
    // Small broadside array with the user on the main-lobe flank, where the
    // gain slope (and thus jitter sensitivity) is steepest.
    auto &g = c.physics.geometry;
    g.n_antennas = 14;
    g.steer_angle_rad = 0.0;
    g.user_angle_rad = 0.0593;
    g.jitter_std_rad = j;
    c.link.pilot_shares_fading = false;
    out.push_back({Label("sigma_jit=%g", j), c});
  }
  return out;
}

std::vector<PresetVariant> Compensation() {
  std::vector<PresetVariant> out;
  for (bool on : {false, true}) {
    auto c = Base("compensation");
    c.link.compensation = on;
    out.push_back({on ? "compensated" : "uncompensated", c});
  }
  return out;
}

std::vector<PresetVariant> Distance() {
  std::vector<PresetVariant> out;
  for (double d : {10.0, 50.0, 100.0}) {
    auto c = Base("distance");
    c.physics.geometry.distance_m = d;
    c.physics.geometry.tx_power_w = 0.5;
    out.push_back({Label("d=%gm", d), c});
  }
  return out;
}

std::vector<PresetVariant> Bandwidth() {
  std::vector<PresetVariant> out;
  for (double b : {1e9, 5e9, 10e9}) {
    auto c = Base("bandwidth");
    c.physics.bandwidth_hz = b;
    c.physics.geometry.tx_power_w = 3e-3;
    out.push_back({Label("B=%gGHz", b / 1e9), c});
  }
  return out;
}

std::vector<PresetVariant> WeightedVsFedavg() {
  std::vector<PresetVariant> out;
  for (auto mode : {fl::AggregationMode::kUniform, fl::AggregationMode::kSnrWeighted}) {
    auto c = Base("weighted_vs_fedavg");
    c.physics.geometry.squint_severity = 15.0;
    c.physics.geometry.tx_power_w = 0.2;
    c.physics.geometry.distance_m = 12.0;
    // Clients spread across the squinted beam so each sees a different
    // slice of the band near its main lobe.
    for (std::size_t i = 0; i < c.fl.n_clients; ++i) {
      GeometryConfig g = c.physics.geometry;
      g.user_angle_rad = (29.5 + 0.1 * static_cast<double>(i)) * kPi / 180.0;
      c.physics.client_geometries.push_back(g);
    }
    c.fl.aggregation = mode;
    out.push_back({mode == fl::AggregationMode::kUniform ? "fedavg" : "snr_weighted", c});
  }
  return out;
}

}  // namespace

const std::vector<std::string> &PresetNames() {
  static const std::vector<std::string> names = {"power_sweep", "squint",    "jitter",
                                                 "compensation", "distance", "bandwidth",
                                                 "weighted_vs_fedavg"};
  return names;
}

std::vector<PresetVariant> Preset(const std::string &name) {
  if (name == "power_sweep") return PowerSweep();
  if (name == "squint") return Squint();
  if (name == "jitter") return Jitter();
  if (name == "compensation") return Compensation();
  if (name == "distance") return Distance();
  if (name == "bandwidth") return Bandwidth();
  if (name == "weighted_vs_fedavg") return WeightedVsFedavg();
  throw Error(ErrorCode::kUnknownPreset, "unknown preset: " + name);
}

}  // namespace thzfl::scenario
