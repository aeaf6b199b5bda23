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

// Deterministic wideband THz link physics and per-round channel sampling.
//
// Power gains are linear. The array factor of the ULA is normalized so that
// its peak is 1, which makes mean_gains[n] <= path_gain(f_n) everywhere.

#ifndef THZFL_CHANNEL_HPP_
#define THZFL_CHANNEL_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "thzfl/common.hpp"
#include "thzfl/rng.hpp"

namespace thzfl::channel {

struct SubcarrierGrid {
  std::size_t n_subcarriers = 0;
  double center_freq_hz = 0.0;
  double bandwidth_hz = 0.0;
  double subcarrier_bw_hz = 0.0;
  std::vector<double> freqs_hz;

  // False when the per-subcarrier scalar-gain approximation is questionable
  // (subcarrier bandwidth above 1% of the carrier).
  bool narrowband() const { return subcarrier_bw_hz <= 0.01 * center_freq_hz; }
};

// Piecewise-linear molecular absorption coefficient k_a(f) in 1/m.
class AbsorptionTable {
 public:
  AbsorptionTable() = default;
  explicit AbsorptionTable(std::vector<std::pair<double, double>> points);

  static AbsorptionTable Flat(double k_a_per_m) { return AbsorptionTable({{0.0, k_a_per_m}}); }
  // Two columns: frequency_hz, k_a_per_m. A non-numeric first line is a header.
  static AbsorptionTable LoadCsv(const std::string &path);

  const std::vector<std::pair<double, double>> &points() const { return points_; }
  bool empty() const { return points_.empty(); }

 private:
  std::vector<std::pair<double, double>> points_;
};

// Default window value near 300 GHz.
inline constexpr double kDefaultAbsorptionPerM = 0.0033;

struct LinkGeometry {
  double distance_m = 10.0;
  double user_angle_rad = 0.0;
  double steer_angle_rad = 0.0;
  std::size_t n_antennas = 64;
  double antenna_spacing_m = 0.0;  // <= 0 means half a wavelength at the carrier
  double squint_severity = 1.0;
  double jitter_std_rad = 0.0;
  double fading_var = 0.0;
  double tx_power_w = 1.0;

  void Validate() const;
  double SpacingFor(const SubcarrierGrid &grid) const;
};

enum class PowerAllocation { kUniform, kInverseGainSq };

struct LinkStatistics {
  std::vector<double> mean_gains;     // linear power gain per subcarrier
  std::vector<double> jitter_vars;    // variance of the unit-mean fluctuation
  std::vector<double> noise_vars;     // additive variance in normalized units, 1/snr
  std::vector<double> snr;            // per-subcarrier mean SNR
  std::vector<double> thermal_noise_w;
  std::vector<double> tx_power_w;

  std::size_t size() const { return mean_gains.size(); }

  // Unit gains, no fluctuation, no noise. Used for pipeline transparency checks.
  static LinkStatistics Transparent(std::size_t n_subcarriers);
  // Builds statistics from gains and additive variance given in received units
  // (noise_vars becomes received_noise / mean_gain^2).
  static LinkStatistics FromReceivedNoise(std::vector<double> mean_gains,
                                          std::vector<double> jitter_vars,
                                          std::span<const double> received_noise);
};

struct ChannelRealization {
  std::vector<double> gains;
  bool delivered = false;
  double spectral_efficiency = 0.0;  // bits/s/Hz averaged over subcarriers
};

SubcarrierGrid BuildGrid(double center_freq_hz, double bandwidth_hz, std::size_t n_subcarriers);

double AbsorptionCoeff(double freq_hz, const AbsorptionTable &table);

// (c / (4 pi f d))^2 * exp(-k_a d)
double PathGain(double freq_hz, double distance_m, double k_a);

// Normalized ULA power gain sinc^2(s * N pi f d_ant / c * (sin phi_user - sin phi_squint(f))).
double SquintMeanGain(double freq_hz, const SubcarrierGrid &grid, const LinkGeometry &geometry);

// Squared pointing-angle slope of the array gain, by central difference.
double JitterSensitivity(double freq_hz, const SubcarrierGrid &grid, const LinkGeometry &geometry);

// sensitivity * sigma_theta^2 + sigma_fading^2
double JitterVariance(double freq_hz, const SubcarrierGrid &grid, const LinkGeometry &geometry);

// k_B T delta_f in watts, per subcarrier.
double NoiseVariance(double noise_temp_k, const SubcarrierGrid &grid);

std::vector<double> AllocatePower(PowerAllocation mode, std::span<const double> mean_gains,
                                  double total_power_w);

LinkStatistics ComputeLinkStatistics(const SubcarrierGrid &grid, const LinkGeometry &geometry,
                                     const AbsorptionTable &absorption, double noise_temp_k,
                                     std::span<const double> power_allocation);

LinkStatistics ComputeLinkStatistics(const SubcarrierGrid &grid, const LinkGeometry &geometry,
                                     const AbsorptionTable &absorption, double noise_temp_k,
                                     PowerAllocation mode = PowerAllocation::kUniform);

double SpectralEfficiency(std::span<const double> snr, std::span<const double> mean_gains,
                          std::span<const double> gains);

ChannelRealization SampleRealization(Rng &rng, const LinkStatistics &stats,
                                     double erasure_threshold);

// Unit-mean lognormal draw with the given variance; exactly 1 when variance is 0.
double SampleUnitMeanLognormal(Rng &rng, double variance);

}  // namespace thzfl::channel

#endif  // THZFL_CHANNEL_HPP_
