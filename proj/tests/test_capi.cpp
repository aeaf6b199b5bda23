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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <string>

#include "thzfl/thzfl.h"

namespace {

const char *kSmall = R"({"seed": 11, "physics": {"n_subcarriers": 16},
  "data": {"n_train": 120, "n_test": 60, "input_dim": 12, "n_classes": 3},
  "fl": {"n_clients": 3, "rounds": 3, "hidden": 6}})";

std::string Take(char *s) {
  std::string out = s ? s : "";
  thzfl_string_free(s);
  return out;
}

}  // namespace

TEST_CASE("status strings and version") {
  CHECK(std::string(thzfl_version()).size() > 0);
  CHECK(std::string(thzfl_status_string(THZFL_OK)) == "ok");
  CHECK(std::string(thzfl_status_string(THZFL_ERR_CONFIG)) == "config-validation");
  CHECK(std::string(thzfl_status_string(THZFL_ERR_UNKNOWN_PRESET)) == "unknown-preset");
  thzfl_string_free(nullptr);
}

TEST_CASE("scenario lifecycle") {
  thzfl_scenario *s = nullptr;
  REQUIRE(thzfl_scenario_from_json(kSmall, &s) == THZFL_OK);
  REQUIRE(s != nullptr);
  char *json = nullptr;
  REQUIRE(thzfl_scenario_to_json(s, &json) == THZFL_OK);
  const std::string resolved = Take(json);
  CHECK(resolved.find("\"n_subcarriers\": 16") != std::string::npos);
  CHECK(thzfl_scenario_set_seed(s, 12) == THZFL_OK);
  thzfl_scenario_destroy(s);
  thzfl_scenario_destroy(nullptr);

  thzfl_scenario *again = nullptr;
  REQUIRE(thzfl_scenario_from_json(resolved.c_str(), &again) == THZFL_OK);
  thzfl_scenario_destroy(again);
}

TEST_CASE("errors are reported with a message") {
  thzfl_scenario *s = nullptr;
  CHECK(thzfl_scenario_from_json(R"({"fl": {"rounds": 0}, "nope": 1})", &s) == THZFL_ERR_CONFIG);
  CHECK(s == nullptr);
  const std::string msg = thzfl_last_error();
  CHECK(msg.find("fl.rounds") != std::string::npos);
  CHECK(msg.find("nope") != std::string::npos);

  CHECK(thzfl_scenario_from_json(nullptr, &s) == THZFL_ERR_INVALID_ARGUMENT);
  CHECK(thzfl_scenario_from_json("{}", nullptr) == THZFL_ERR_INVALID_ARGUMENT);
  CHECK(thzfl_scenario_from_file("does/not/exist.json", &s) == THZFL_ERR_IO);
  CHECK(thzfl_scenario_from_preset("nonexistent", 0, &s) == THZFL_ERR_UNKNOWN_PRESET);
  CHECK(thzfl_scenario_from_preset("squint", 99, &s) == THZFL_ERR_INVALID_ARGUMENT);
  CHECK(thzfl_run(nullptr, 1, nullptr) == THZFL_ERR_INVALID_ARGUMENT);

  REQUIRE(thzfl_scenario_from_json("{}", &s) == THZFL_OK);
  CHECK(std::string(thzfl_last_error()).empty());
  thzfl_scenario_destroy(s);
}

TEST_CASE("presets are enumerable") {
  REQUIRE(thzfl_preset_count() == 7);
  CHECK(std::string(thzfl_preset_name(0)) == "power_sweep");
  CHECK(thzfl_preset_name(7) == nullptr);
  size_t n = 0;
  REQUIRE(thzfl_preset_variant_count("jitter", &n) == THZFL_OK);
  CHECK(n == 5);
  char *label = nullptr;
  REQUIRE(thzfl_preset_variant_label("jitter", 4, &label) == THZFL_OK);
  CHECK(Take(label).size() > 0);
  CHECK(thzfl_preset_variant_count("bogus", &n) == THZFL_ERR_UNKNOWN_PRESET);
  thzfl_scenario *s = nullptr;
  for (size_t i = 0; i < thzfl_preset_count(); ++i) {
    REQUIRE(thzfl_scenario_from_preset(thzfl_preset_name(i), 0, &s) == THZFL_OK);
    thzfl_scenario_destroy(s);
  }
}

TEST_CASE("run and results") {
  thzfl_scenario *s = nullptr;
  REQUIRE(thzfl_scenario_from_json(kSmall, &s) == THZFL_OK);
  thzfl_result *a = nullptr, *b = nullptr;
  REQUIRE(thzfl_run(s, 1, &a) == THZFL_OK);
  REQUIRE(thzfl_run(s, 3, &b) == THZFL_OK);
  CHECK(thzfl_result_round_count(a) == 3);
  const double acc = thzfl_result_final_accuracy(a);
  CHECK(acc >= 0.0);
  CHECK(acc <= 1.0);
  CHECK(thzfl_result_accuracy(a, 2) == acc);
  CHECK(std::isnan(thzfl_result_accuracy(a, 3)));

  char *csv_a = nullptr, *csv_b = nullptr, *json = nullptr;
  REQUIRE(thzfl_result_to_string(a, THZFL_FORMAT_CSV, &csv_a) == THZFL_OK);
  REQUIRE(thzfl_result_to_string(b, THZFL_FORMAT_CSV, &csv_b) == THZFL_OK);
  CHECK(Take(csv_a) == Take(csv_b));
  REQUIRE(thzfl_result_to_string(a, THZFL_FORMAT_JSON, &json) == THZFL_OK);
  CHECK(Take(json).front() == '[');

  CHECK(thzfl_result_write(a, "capi_result.csv", THZFL_FORMAT_CSV) == THZFL_OK);
  std::remove("capi_result.csv");
  std::remove("capi_result.csv.config.json");
  CHECK(thzfl_result_write(a, "no/such/dir/x.csv", THZFL_FORMAT_CSV) == THZFL_ERR_IO);

  thzfl_result_destroy(a);
  thzfl_result_destroy(b);
  thzfl_result_destroy(nullptr);
  thzfl_scenario_destroy(s);
}

TEST_CASE("design check") {
  thzfl_scenario *s = nullptr;
  REQUIRE(thzfl_scenario_from_json(kSmall, &s) == THZFL_OK);
  char *report = nullptr;
  int feasible = -1;
  REQUIRE(thzfl_design_check(s, 1, &report, &feasible) == THZFL_OK);
  CHECK((feasible == 0 || feasible == 1));
  const std::string text = Take(report);
  CHECK(text.find("\"inequalities\"") != std::string::npos);
  REQUIRE(thzfl_design_check(s, 0, &report, nullptr) == THZFL_OK);
  CHECK(Take(report).find("total_snr") != std::string::npos);
  thzfl_scenario_destroy(s);
}

TEST_CASE("physics helpers") {
  CHECK(thzfl_path_gain(300e9, 10.0, 0.0) == doctest::Approx(6.323815174603835e-11).epsilon(1e-12).scale(0));
  CHECK(thzfl_thermal_noise_w(290.0, 10e9 / 128) == doctest::Approx(3.1280328906249997e-13).epsilon(1e-12).scale(0));
  CHECK(std::isnan(thzfl_path_gain(-1.0, 10.0, 0.0)));
  CHECK(std::isnan(thzfl_thermal_noise_w(0.0, 1e9)));
}
