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

// Command-line front end. Talks to the simulator only through the C API.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "thzfl/thzfl.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;

struct ScenarioDeleter {
  void operator()(thzfl_scenario *s) const { thzfl_scenario_destroy(s); }
};
struct ResultDeleter {
  void operator()(thzfl_result *r) const { thzfl_result_destroy(r); }
};
using ScenarioPtr = std::unique_ptr<thzfl_scenario, ScenarioDeleter>;
using ResultPtr = std::unique_ptr<thzfl_result, ResultDeleter>;

class CString {
 public:
  CString() = default;
  ~CString() { thzfl_string_free(p_); }
  CString(const CString &) = delete;
  CString &operator=(const CString &) = delete;
  char **out() { return &p_; }
  std::string str() const { return p_ ? p_ : ""; }

 private:
  char *p_ = nullptr;
};

int Report(thzfl_status s) {
  std::cerr << "error (" << thzfl_status_string(s) << "): " << thzfl_last_error() << "\n";
  return s == THZFL_ERR_CONFIG ? kExitConfig : kExitFailure;
}

std::size_t Workers() {
  const char *env = std::getenv("THZFL_WORKERS");
  if (!env || !*env) return 1;
  try {
    const long v = std::stol(env);
    return v > 0 ? static_cast<std::size_t>(v) : 1;
  } catch (...) {
    return 1;
  }
}

thzfl_format ParseFormat(const std::string &f) { return f == "json" ? THZFL_FORMAT_JSON : THZFL_FORMAT_CSV; }

bool WriteText(const std::string &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  return static_cast<bool>(out);
}

// Runs one scenario and writes the records (plus a resolved-config sidecar).
int RunOne(const thzfl_scenario *sc, const std::string &out, const std::string &format) {
  thzfl_result *raw = nullptr;
  if (auto s = thzfl_run(sc, Workers(), &raw); s != THZFL_OK) return Report(s);
  ResultPtr res(raw);
  const auto fmt = ParseFormat(format);
  if (out.empty()) {
    CString text;
    if (auto s = thzfl_result_to_string(res.get(), fmt, text.out()); s != THZFL_OK) return Report(s);
    std::cout << text.str();
    return kExitOk;
  }
  if (auto s = thzfl_result_write(res.get(), out.c_str(), fmt); s != THZFL_OK) return Report(s);
  CString cfg;
  if (auto s = thzfl_scenario_to_json(sc, cfg.out()); s != THZFL_OK) return Report(s);
  if (!WriteText(out + ".config.json", cfg.str() + "\n")) {
    std::cerr << "error (io-error): cannot write " << out << ".config.json\n";
    return kExitFailure;
  }
  std::cerr << "wrote " << out << " (final accuracy " << thzfl_result_final_accuracy(res.get()) << ")\n";
  return kExitOk;
}

int CmdRun(const std::string &config, const std::optional<std::uint64_t> &seed, const std::string &out,
           const std::string &format) {
  thzfl_scenario *raw = nullptr;
  if (auto s = thzfl_scenario_from_file(config.c_str(), &raw); s != THZFL_OK) return Report(s);
  ScenarioPtr sc(raw);
  if (seed) thzfl_scenario_set_seed(sc.get(), *seed);
  return RunOne(sc.get(), out, format);
}

int CmdPreset(const std::string &name, const std::string &out, bool run, const std::string &format,
              const std::optional<std::uint64_t> &seed) {
  std::size_t n = 0;
  if (auto s = thzfl_preset_variant_count(name.c_str(), &n); s != THZFL_OK) return Report(s);
  auto configs = nlohmann::ordered_json::array();
  for (std::size_t v = 0; v < n; ++v) {
    thzfl_scenario *raw = nullptr;
    if (auto s = thzfl_scenario_from_preset(name.c_str(), v, &raw); s != THZFL_OK) return Report(s);
    ScenarioPtr sc(raw);
    if (seed) thzfl_scenario_set_seed(sc.get(), *seed);
    CString label;
    if (auto s = thzfl_preset_variant_label(name.c_str(), v, label.out()); s != THZFL_OK) return Report(s);
    if (!run) {
      CString cfg;
      if (auto s = thzfl_scenario_to_json(sc.get(), cfg.out()); s != THZFL_OK) return Report(s);
      configs.push_back({{"label", label.str()}, {"config", nlohmann::ordered_json::parse(cfg.str())}});
      continue;
    }
    if (out.empty()) {
      thzfl_result *rr = nullptr;
      if (auto s = thzfl_run(sc.get(), Workers(), &rr); s != THZFL_OK) return Report(s);
      ResultPtr res(rr);
      std::printf("%-24s final_accuracy=%.4f\n", label.str().c_str(), thzfl_result_final_accuracy(res.get()));
      continue;
    }
    std::filesystem::create_directories(out);
    const std::string path = (std::filesystem::path(out) / (name + "__" + label.str() + "." + format)).string();
    if (int rc = RunOne(sc.get(), path, format); rc != kExitOk) return rc;
  }
  if (!run) {
    const std::string text = configs.dump(2) + "\n";
    if (out.empty()) {
      std::cout << text;
    } else if (!WriteText(out, text)) {
      std::cerr << "error (io-error): cannot write " << out << "\n";
      return kExitFailure;
    }
  }
  return kExitOk;
}

int CmdDesign(const std::string &config, bool json) {
  thzfl_scenario *raw = nullptr;
  if (auto s = thzfl_scenario_from_file(config.c_str(), &raw); s != THZFL_OK) return Report(s);
  ScenarioPtr sc(raw);
  CString report;
  int feasible = 0;
  if (auto s = thzfl_design_check(sc.get(), json ? 1 : 0, report.out(), &feasible); s != THZFL_OK)
    return Report(s);
  std::cout << report.str() << (json ? "\n" : "");
  return kExitOk;
}

int CmdList() {
  for (std::size_t i = 0; i < thzfl_preset_count(); ++i) {
    const char *name = thzfl_preset_name(i);
    std::size_t n = 0;
    thzfl_preset_variant_count(name, &n);
    std::string labels;
    for (std::size_t v = 0; v < n; ++v) {
      CString l;
      if (thzfl_preset_variant_label(name, v, l.out()) == THZFL_OK) labels += (v ? ", " : "") + l.str();
    }
    std::printf("%-20s %s\n", name, labels.c_str());
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Federated learning over a wideband THz multicarrier uplink"};
  app.require_subcommand(1);
  app.set_version_flag("--version", thzfl_version());

  std::string config, out, format = "csv", preset_name;
  std::optional<std::uint64_t> seed;
  bool run_preset = false, json = false;

  auto *run = app.add_subcommand("run", "run one scenario config");
  run->add_option("--config", config, "scenario JSON file")->required();
  run->add_option("--seed", seed, "override the master seed");
  run->add_option("--out", out, "output path (stdout when omitted)");
  run->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

  auto *preset = app.add_subcommand("preset", "print or run a named experiment family");
  preset->add_option("name", preset_name, "preset name (see list-presets)")->required();
  preset->add_option("--out", out, "config file (print mode) or output directory (--run)");
  preset->add_flag("--run", run_preset, "run every variant");
  preset->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  preset->add_option("--seed", seed, "override the master seed");

  auto *design = app.add_subcommand("design-check", "evaluate the design inequalities");
  design->add_option("--config", config, "scenario JSON file")->required();
  design->add_flag("--json", json, "emit JSON instead of text");

  auto *list = app.add_subcommand("list-presets", "list preset names and variants");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    return app.exit(e);
  }

  if (*run) return CmdRun(config, seed, out, format);
  if (*preset) return CmdPreset(preset_name, out, run_preset, format, seed);
  if (*design) return CmdDesign(config, json);
  if (*list) return CmdList();
  return kExitFailure;
}
