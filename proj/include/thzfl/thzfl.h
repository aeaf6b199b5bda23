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

/*
 * Stable C interface to the thzfl simulator.
 *
 * Objects are opaque handles created by *_from_* / thzfl_run and released by
 * the matching *_destroy. Every fallible call returns a thzfl_status; on
 * failure a description is available from thzfl_last_error() on the same
 * thread. Strings returned through char** are heap allocated by the library
 * and must be released with thzfl_string_free.
 */

#ifndef THZFL_THZFL_H_
#define THZFL_THZFL_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(THZFL_BUILDING)
#define THZFL_API __declspec(dllexport)
#else
#define THZFL_API __declspec(dllimport)
#endif
#else
#define THZFL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef struct thzfl_scenario thzfl_scenario;
typedef struct thzfl_result thzfl_result;

typedef enum thzfl_status {
  THZFL_OK = 0,
  THZFL_ERR_INVALID_ARGUMENT = 1,
  THZFL_ERR_CONFIG = 2,
  THZFL_ERR_IO = 3,
  THZFL_ERR_BAD_MAGIC = 4,
  THZFL_ERR_TRUNCATED_FILE = 5,
  THZFL_ERR_COUNT_MISMATCH = 6,
  THZFL_ERR_UNKNOWN_PRESET = 7,
  THZFL_ERR_INTERNAL = 100
} thzfl_status;

typedef enum thzfl_format { THZFL_FORMAT_CSV = 0, THZFL_FORMAT_JSON = 1 } thzfl_format;

THZFL_API const char *thzfl_version(void);
THZFL_API const char *thzfl_status_string(thzfl_status status);
/* Message of the last failed call on this thread; "" if none. */
THZFL_API const char *thzfl_last_error(void);
THZFL_API void thzfl_string_free(char *s);

/* Scenarios */
THZFL_API thzfl_status thzfl_scenario_from_json(const char *json, thzfl_scenario **out);
THZFL_API thzfl_status thzfl_scenario_from_file(const char *path, thzfl_scenario **out);
THZFL_API thzfl_status thzfl_scenario_from_preset(const char *name, size_t variant,
                                                  thzfl_scenario **out);
THZFL_API void thzfl_scenario_destroy(thzfl_scenario *scenario);
THZFL_API thzfl_status thzfl_scenario_set_seed(thzfl_scenario *scenario, uint64_t seed);
/* Fully resolved config, defaults included. */
THZFL_API thzfl_status thzfl_scenario_to_json(const thzfl_scenario *scenario, char **out);

/* Runs; workers only changes wall-clock time, never results. */
THZFL_API thzfl_status thzfl_run(const thzfl_scenario *scenario, size_t workers,
                                 thzfl_result **out);
THZFL_API void thzfl_result_destroy(thzfl_result *result);
THZFL_API size_t thzfl_result_round_count(const thzfl_result *result);
THZFL_API double thzfl_result_final_accuracy(const thzfl_result *result);
/* NaN when round is out of range. */
THZFL_API double thzfl_result_accuracy(const thzfl_result *result, size_t round);
THZFL_API thzfl_status thzfl_result_to_string(const thzfl_result *result, thzfl_format format,
                                              char **out);
THZFL_API thzfl_status thzfl_result_write(const thzfl_result *result, const char *path,
                                          thzfl_format format);

/* Presets */
THZFL_API size_t thzfl_preset_count(void);
/* NULL when index is out of range. The string is owned by the library. */
THZFL_API const char *thzfl_preset_name(size_t index);
THZFL_API thzfl_status thzfl_preset_variant_count(const char *name, size_t *out);
THZFL_API thzfl_status thzfl_preset_variant_label(const char *name, size_t variant, char **out);

/* Design inequalities; as_json selects JSON over the text block. */
THZFL_API thzfl_status thzfl_design_check(const thzfl_scenario *scenario, int as_json,
                                          char **out_report, int *out_feasible);

/* Physics helpers; NaN on invalid input. */
THZFL_API double thzfl_path_gain(double freq_hz, double distance_m, double absorption_per_m);
THZFL_API double thzfl_thermal_noise_w(double temperature_k, double bandwidth_hz);

#ifdef __cplusplus
}
#endif

#endif /* THZFL_THZFL_H_ */
