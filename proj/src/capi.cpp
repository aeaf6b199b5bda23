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

#include "thzfl/thzfl.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <limits>
#include <new>
#include <string>

#include "thzfl/channel.hpp"
#include "thzfl/common.hpp"
#include "thzfl/scenario.hpp"

struct thzfl_scenario {
  thzfl::scenario::ScenarioConfig config;
};

struct thzfl_result {
  thzfl::scenario::RunSummary summary;
};

namespace {

thread_local std::string g_last_error;

thzfl_status FromCode(thzfl::ErrorCode code) {
  switch (code) {
    case thzfl::ErrorCode::kInvalidArgument: return THZFL_ERR_INVALID_ARGUMENT;
    case thzfl::ErrorCode::kConfig: return THZFL_ERR_CONFIG;
    case thzfl::ErrorCode::kIo: return THZFL_ERR_IO;
    case thzfl::ErrorCode::kBadMagic: return THZFL_ERR_BAD_MAGIC;
    case thzfl::ErrorCode::kTruncatedFile: return THZFL_ERR_TRUNCATED_FILE;
    case thzfl::ErrorCode::kCountMismatch: return THZFL_ERR_COUNT_MISMATCH;
    case thzfl::ErrorCode::kUnknownPreset: return THZFL_ERR_UNKNOWN_PRESET;
  }
  return THZFL_ERR_INTERNAL;
}

thzfl_status Fail(thzfl_status s, std::string msg) {
  g_last_error = std::move(msg);
  return s;
}

// Runs fn, translating exceptions into status codes. Nothing escapes the ABI.
template <class Fn>
thzfl_status Guard(Fn &&fn) {
  try {
    g_last_error.clear();
    fn();
    return THZFL_OK;
  } catch (const thzfl::Error &e) {
    return Fail(FromCode(e.code()), e.what());
  } catch (const std::bad_alloc &) {
    return Fail(THZFL_ERR_INTERNAL, "out of memory");
  } catch (const std::exception &e) {
    return Fail(THZFL_ERR_INTERNAL, e.what());
  } catch (...) {
    return Fail(THZFL_ERR_INTERNAL, "unknown failure");
  }
}

char *Dup(const std::string &s) {
  char *p = static_cast<char *>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

void Require(bool ok, const char *what) {
  if (!ok) thzfl::ThrowInvalid(what);
}

thzfl::scenario::OutputFormat Format(thzfl_format f) {
  if (f == THZFL_FORMAT_CSV) return thzfl::scenario::OutputFormat::kCsv;
  if (f == THZFL_FORMAT_JSON) return thzfl::scenario::OutputFormat::kJson;
  thzfl::ThrowInvalid("unknown output format");
}

}  // namespace

extern "C" {

const char *thzfl_version(void) { return "1.0.0"; }

const char *thzfl_status_string(thzfl_status status) {
  switch (status) {
    case THZFL_OK: return "ok";
    case THZFL_ERR_INVALID_ARGUMENT: return "invalid-argument";
    case THZFL_ERR_CONFIG: return "config-validation";
    case THZFL_ERR_IO: return "io-error";
    case THZFL_ERR_BAD_MAGIC: return "bad-magic";
    case THZFL_ERR_TRUNCATED_FILE: return "truncated-file";
    case THZFL_ERR_COUNT_MISMATCH: return "count-mismatch";
    case THZFL_ERR_UNKNOWN_PRESET: return "unknown-preset";
    case THZFL_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char *thzfl_last_error(void) { return g_last_error.c_str(); }

void thzfl_string_free(char *s) { std::free(s); }

thzfl_status thzfl_scenario_from_json(const char *json, thzfl_scenario **out) {
  return Guard([&] {
    Require(json && out, "null argument");
    *out = nullptr;
    auto *s = new thzfl_scenario{thzfl::scenario::ParseConfig(json)};
    *out = s;
  });
}

thzfl_status thzfl_scenario_from_file(const char *path, thzfl_scenario **out) {
  return Guard([&] {
    Require(path && out, "null argument");
    *out = nullptr;
    *out = new thzfl_scenario{thzfl::scenario::LoadConfig(path)};
  });
}

thzfl_status thzfl_scenario_from_preset(const char *name, size_t variant, thzfl_scenario **out) {
  return Guard([&] {
    Require(name && out, "null argument");
    *out = nullptr;
    auto variants = thzfl::scenario::Preset(name);
    Require(variant < variants.size(), "preset variant index out of range");
    *out = new thzfl_scenario{std::move(variants[variant].config)};
  });
}

void thzfl_scenario_destroy(thzfl_scenario *scenario) { delete scenario; }

thzfl_status thzfl_scenario_set_seed(thzfl_scenario *scenario, uint64_t seed) {
  return Guard([&] {
    Require(scenario, "null scenario");
    scenario->config.seed = seed;
  });
}

thzfl_status thzfl_scenario_to_json(const thzfl_scenario *scenario, char **out) {
  return Guard([&] {
    Require(scenario && out, "null argument");
    *out = Dup(thzfl::scenario::ToJson(scenario->config));
  });
}

thzfl_status thzfl_run(const thzfl_scenario *scenario, size_t workers, thzfl_result **out) {
  return Guard([&] {
    Require(scenario && out, "null argument");
    *out = nullptr;
    thzfl::scenario::RunOptions opt;
    opt.workers = workers == 0 ? 1 : workers;
    *out = new thzfl_result{thzfl::scenario::RunScenario(scenario->config, opt)};
  });
}

void thzfl_result_destroy(thzfl_result *result) { delete result; }

size_t thzfl_result_round_count(const thzfl_result *result) {
  return result ? result->summary.records.size() : 0;
}

double thzfl_result_final_accuracy(const thzfl_result *result) {
  return result ? result->summary.final_accuracy : std::numeric_limits<double>::quiet_NaN();
}

double thzfl_result_accuracy(const thzfl_result *result, size_t round) {
  if (!result || round >= result->summary.records.size()) return std::numeric_limits<double>::quiet_NaN();
  return result->summary.records[round].accuracy;
}

thzfl_status thzfl_result_to_string(const thzfl_result *result, thzfl_format format, char **out) {
  return Guard([&] {
    Require(result && out, "null argument");
    const auto f = Format(format);
    const auto &r = result->summary.records;
    *out = Dup(f == thzfl::scenario::OutputFormat::kCsv ? thzfl::scenario::ToCsv(r)
                                                        : thzfl::scenario::ToJsonRecords(r));
  });
}

thzfl_status thzfl_result_write(const thzfl_result *result, const char *path, thzfl_format format) {
  return Guard([&] {
    Require(result && path, "null argument");
    thzfl::scenario::EmitResults(result->summary.records, path, Format(format));
  });
}

size_t thzfl_preset_count(void) { return thzfl::scenario::PresetNames().size(); }

const char *thzfl_preset_name(size_t index) {
  const auto &names = thzfl::scenario::PresetNames();
  return index < names.size() ? names[index].c_str() : nullptr;
}

thzfl_status thzfl_preset_variant_count(const char *name, size_t *out) {
  return Guard([&] {
    Require(name && out, "null argument");
    *out = thzfl::scenario::Preset(name).size();
  });
}

thzfl_status thzfl_preset_variant_label(const char *name, size_t variant, char **out) {
  return Guard([&] {
    Require(name && out, "null argument");
    const auto v = thzfl::scenario::Preset(name);
    Require(variant < v.size(), "preset variant index out of range");
    *out = Dup(v[variant].label);
  });
}

thzfl_status thzfl_design_check(const thzfl_scenario *scenario, int as_json, char **out_report,
                                int *out_feasible) {
  return Guard([&] {
    Require(scenario && out_report, "null argument");
    const auto report = thzfl::scenario::DesignCheck(scenario->config);
    *out_report = Dup(as_json ? report.ToJson() : report.ToText());
    if (out_feasible) *out_feasible = report.feasible ? 1 : 0;
  });
}

double thzfl_path_gain(double freq_hz, double distance_m, double absorption_per_m) {
  try {
    return thzfl::channel::PathGain(freq_hz, distance_m, absorption_per_m);
  } catch (const std::exception &e) {
    g_last_error = e.what();
    return std::numeric_limits<double>::quiet_NaN();
  }
}

double thzfl_thermal_noise_w(double temperature_k, double bandwidth_hz) {
  if (!(temperature_k > 0.0) || !(bandwidth_hz > 0.0)) {
    g_last_error = "temperature and bandwidth must be positive";
    return std::numeric_limits<double>::quiet_NaN();
  }
  return thzfl::kBoltzmann * temperature_k * bandwidth_hz;
}

}  // extern "C"
