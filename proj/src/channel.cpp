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

#include "thzfl/channel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

namespace thzfl::channel {

namespace {

double Sinc(double x) {
  if (std::abs(x) < 1e-8) return 1.0 - x * x / 6.0;
  return std::sin(x) / x;
}

// Normalized array power gain seen at user_angle for subcarrier frequency f.
double ArrayGain(double freq_hz, const SubcarrierGrid &grid, const LinkGeometry &geometry,
                 double user_angle) {
  const double d_ant = geometry.SpacingFor(grid);
  const double squint_arg =
      std::clamp(grid.center_freq_hz / freq_hz * std::sin(geometry.steer_angle_rad), -1.0, 1.0);
  const double phi_squint = std::asin(squint_arg);
  const double phase = geometry.squint_severity * static_cast<double>(geometry.n_antennas) * kPi *
                       freq_hz * d_ant / kSpeedOfLight *
                       (std::sin(user_angle) - std::sin(phi_squint));
  const double s = Sinc(phase);
  return s * s;
}

}  // namespace

AbsorptionTable::AbsorptionTable(std::vector<std::pair<double, double>> points)
    : points_(std::move(points)) {
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!(points_[i].second >= 0.0) || !std::isfinite(points_[i].second)) {
      ThrowInvalid("absorption table: negative or non-finite coefficient at row " +
                   std::to_string(i));
    }
    if (i > 0 && !(points_[i].first > points_[i - 1].first)) {
      ThrowInvalid("absorption table: frequencies must be strictly increasing (row " +
                   std::to_string(i) + ")");
    }
  }
}

AbsorptionTable AbsorptionTable::LoadCsv(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open absorption table: " + path);
  std::vector<std::pair<double, double>> points;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    double f = 0.0;
    double k = 0.0;
    if (!(row >> f >> k)) {
      if (first) {
        first = false;
        continue;
      }
      ThrowInvalid("absorption table: malformed row '" + line + "'");
    }
    first = false;
    points.emplace_back(f, k);
  }
  return AbsorptionTable(std::move(points));
}

void LinkGeometry::Validate() const {
  if (!(distance_m > 0.0)) ThrowInvalid("geometry: distance_m must be > 0");
  if (n_antennas < 1) ThrowInvalid("geometry: n_antennas must be >= 1");
  if (!(squint_severity >= 0.0)) ThrowInvalid("geometry: squint_severity must be >= 0");
  if (!(jitter_std_rad >= 0.0)) ThrowInvalid("geometry: jitter_std_rad must be >= 0");
  if (!(fading_var >= 0.0)) ThrowInvalid("geometry: fading_var must be >= 0");
  if (!(tx_power_w >= 0.0)) ThrowInvalid("geometry: tx_power_w must be >= 0");
}

double LinkGeometry::SpacingFor(const SubcarrierGrid &grid) const {
  if (antenna_spacing_m > 0.0) return antenna_spacing_m;
  return kSpeedOfLight / (2.0 * grid.center_freq_hz);
}

LinkStatistics LinkStatistics::Transparent(std::size_t n_subcarriers) {
  LinkStatistics s;
  s.mean_gains.assign(n_subcarriers, 1.0);
  s.jitter_vars.assign(n_subcarriers, 0.0);
  s.noise_vars.assign(n_subcarriers, 0.0);
  s.snr.assign(n_subcarriers, std::numeric_limits<double>::infinity());
  s.thermal_noise_w.assign(n_subcarriers, 0.0);
  s.tx_power_w.assign(n_subcarriers, 0.0);
  return s;
}

LinkStatistics LinkStatistics::FromReceivedNoise(std::vector<double> mean_gains,
                                                 std::vector<double> jitter_vars,
                                                 std::span<const double> received_noise) {
  if (mean_gains.size() != jitter_vars.size() || mean_gains.size() != received_noise.size()) {
    ThrowInvalid("link statistics: vector lengths differ");
  }
  LinkStatistics s;
  const std::size_t n = mean_gains.size();
  s.noise_vars.resize(n);
  s.snr.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double g2 = mean_gains[i] * mean_gains[i];
    s.noise_vars[i] = received_noise[i] > 0.0
                          ? (g2 > 0.0 ? received_noise[i] / g2
                                      : std::numeric_limits<double>::infinity())
                          : 0.0;
    s.snr[i] = s.noise_vars[i] > 0.0 ? 1.0 / s.noise_vars[i]
                                     : std::numeric_limits<double>::infinity();
  }
  s.mean_gains = std::move(mean_gains);
  s.jitter_vars = std::move(jitter_vars);
  s.thermal_noise_w.assign(n, 0.0);
  s.tx_power_w.assign(n, 0.0);
  return s;
}

SubcarrierGrid BuildGrid(double center_freq_hz, double bandwidth_hz, std::size_t n_subcarriers) {
  if (n_subcarriers < 1) ThrowInvalid("grid: n_subcarriers must be >= 1");
  if (!(bandwidth_hz > 0.0)) ThrowInvalid("grid: bandwidth_hz must be > 0");
  if (!(center_freq_hz > 0.0)) ThrowInvalid("grid: center_freq_hz must be > 0");
  if (!(center_freq_hz > bandwidth_hz / 2.0)) {
    ThrowInvalid("grid: bandwidth exceeds twice the center frequency");
  }
  SubcarrierGrid g;
  g.n_subcarriers = n_subcarriers;
  g.center_freq_hz = center_freq_hz;
  g.bandwidth_hz = bandwidth_hz;
  g.subcarrier_bw_hz = bandwidth_hz / static_cast<double>(n_subcarriers);
  g.freqs_hz.resize(n_subcarriers);
  const double lo = center_freq_hz - bandwidth_hz / 2.0;
  for (std::size_t n = 0; n < n_subcarriers; ++n) {
    g.freqs_hz[n] = lo + (static_cast<double>(n) + 0.5) * g.subcarrier_bw_hz;
  }
  return g;
}

double AbsorptionCoeff(double freq_hz, const AbsorptionTable &table) {
  const auto &pts = table.points();
  if (pts.empty()) return 0.0;
  if (freq_hz <= pts.front().first) return pts.front().second;
  if (freq_hz >= pts.back().first) return pts.back().second;
  auto hi = std::upper_bound(pts.begin(), pts.end(), freq_hz,
                             [](double f, const auto &p) { return f < p.first; });
  auto lo = hi - 1;
  const double t = (freq_hz - lo->first) / (hi->first - lo->first);
  return lo->second + t * (hi->second - lo->second);
}

double PathGain(double freq_hz, double distance_m, double k_a) {
  if (!(freq_hz > 0.0)) ThrowInvalid("path_gain: frequency must be > 0");
  if (!(distance_m > 0.0)) ThrowInvalid("path_gain: distance must be > 0");
  if (!(k_a >= 0.0)) ThrowInvalid("path_gain: absorption coefficient must be >= 0");
  const double spread = kSpeedOfLight / (4.0 * kPi * freq_hz * distance_m);
  return spread * spread * std::exp(-k_a * distance_m);
}

double SquintMeanGain(double freq_hz, const SubcarrierGrid &grid, const LinkGeometry &geometry) {
  return ArrayGain(freq_hz, grid, geometry, geometry.user_angle_rad);
}

double JitterSensitivity(double freq_hz, const SubcarrierGrid &grid,
                         const LinkGeometry &geometry) {
  constexpr double kStep = 1e-5;
  const double up = ArrayGain(freq_hz, grid, geometry, geometry.user_angle_rad + kStep);
  const double down = ArrayGain(freq_hz, grid, geometry, geometry.user_angle_rad - kStep);
  const double slope = (up - down) / (2.0 * kStep);
  return slope * slope;
}

double JitterVariance(double freq_hz, const SubcarrierGrid &grid, const LinkGeometry &geometry) {
  const double sigma2 = geometry.jitter_std_rad * geometry.jitter_std_rad;
  const double pointing = sigma2 > 0.0 ? JitterSensitivity(freq_hz, grid, geometry) * sigma2 : 0.0;
  return pointing + geometry.fading_var;
}

double NoiseVariance(double noise_temp_k, const SubcarrierGrid &grid) {
  if (!(noise_temp_k > 0.0)) ThrowInvalid("noise_variance: temperature must be > 0");
  return kBoltzmann * noise_temp_k * grid.subcarrier_bw_hz;
}

std::vector<double> AllocatePower(PowerAllocation mode, std::span<const double> mean_gains,
                                  double total_power_w) {
  const std::size_t n = mean_gains.size();
  std::vector<double> p(n, n ? total_power_w / static_cast<double>(n) : 0.0);
  if (mode == PowerAllocation::kUniform || n == 0) return p;
  const double peak = *std::max_element(mean_gains.begin(), mean_gains.end());
  if (!(peak > 0.0)) return p;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double g = std::max(mean_gains[i] / peak, 1e-6);
    p[i] = 1.0 / (g * g);
    total += p[i];
  }
  for (auto &v : p) v *= total_power_w / total;
  return p;
}

LinkStatistics ComputeLinkStatistics(const SubcarrierGrid &grid, const LinkGeometry &geometry,
                                     const AbsorptionTable &absorption, double noise_temp_k,
                                     std::span<const double> power_allocation) {
  geometry.Validate();
  const std::size_t n = grid.n_subcarriers;
  if (power_allocation.size() != n) ThrowInvalid("link_statistics: power allocation length");
  const double thermal = NoiseVariance(noise_temp_k, grid);
  LinkStatistics s;
  s.mean_gains.resize(n);
  s.jitter_vars.resize(n);
  s.noise_vars.resize(n);
  s.snr.resize(n);
  s.thermal_noise_w.assign(n, thermal);
  s.tx_power_w.assign(power_allocation.begin(), power_allocation.end());
  for (std::size_t i = 0; i < n; ++i) {
    const double f = grid.freqs_hz[i];
    const double ka = AbsorptionCoeff(f, absorption);
    s.mean_gains[i] = PathGain(f, geometry.distance_m, ka) * SquintMeanGain(f, grid, geometry);
    s.jitter_vars[i] = JitterVariance(f, grid, geometry);
    s.snr[i] = power_allocation[i] * s.mean_gains[i] / thermal;
    s.noise_vars[i] = s.snr[i] > 0.0 ? 1.0 / s.snr[i] : std::numeric_limits<double>::infinity();
  }
  return s;
}

LinkStatistics ComputeLinkStatistics(const SubcarrierGrid &grid, const LinkGeometry &geometry,
                                     const AbsorptionTable &absorption, double noise_temp_k,
                                     PowerAllocation mode) {
  if (mode == PowerAllocation::kUniform) {
    std::vector<double> p(grid.n_subcarriers,
                          geometry.tx_power_w / static_cast<double>(grid.n_subcarriers));
    return ComputeLinkStatistics(grid, geometry, absorption, noise_temp_k, p);
  }
  // Gain shape first, then allocate against it.
  std::vector<double> unit(grid.n_subcarriers, 1.0);
  LinkStatistics shape = ComputeLinkStatistics(grid, geometry, absorption, noise_temp_k, unit);
  auto p = AllocatePower(mode, shape.mean_gains, geometry.tx_power_w);
  return ComputeLinkStatistics(grid, geometry, absorption, noise_temp_k, p);
}

double SpectralEfficiency(std::span<const double> snr, std::span<const double> mean_gains,
                          std::span<const double> gains) {
  if (snr.empty()) return 0.0;
  double acc = 0.0;
  for (std::size_t n = 0; n < snr.size(); ++n) {
    double inst = 0.0;
    if (snr[n] > 0.0 && mean_gains[n] > 0.0) {
      inst = std::isinf(snr[n]) ? snr[n] : snr[n] * gains[n] / mean_gains[n];
    }
    acc += std::log2(1.0 + inst);
  }
  return acc / static_cast<double>(snr.size());
}

double SampleUnitMeanLognormal(Rng &rng, double variance) {
  if (!(variance > 0.0)) return 1.0;
  const double s2 = std::log1p(variance);
  std::normal_distribution<double> z(-0.5 * s2, std::sqrt(s2));
  return std::exp(z(rng));
}

ChannelRealization SampleRealization(Rng &rng, const LinkStatistics &stats,
                                     double erasure_threshold) {
  ChannelRealization r;
  const std::size_t n = stats.size();
  r.gains.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    r.gains[i] = stats.mean_gains[i] * SampleUnitMeanLognormal(rng, stats.jitter_vars[i]);
  }
  r.spectral_efficiency = SpectralEfficiency(stats.snr, stats.mean_gains, r.gains);
  r.delivered = r.spectral_efficiency >= erasure_threshold;
  return r;
}

}  // namespace thzfl::channel
