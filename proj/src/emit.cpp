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

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "thzfl/scenario.hpp"

namespace thzfl::scenario {

namespace {

std::string Fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

template <class T, class F>
std::string JoinList(const std::vector<T> &v, F fmt) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ';';
    s += fmt(v[i]);
  }
  return s;
}

std::vector<std::string> Split(const std::string &s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

double ParseDouble(const std::string &s) {
  char *end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') throw Error(ErrorCode::kInvalidArgument, "bad number in CSV: '" + s + "'");
  return v;
}

std::string CleanWarning(std::string w) {
  for (char &ch : w)
    if (ch == ',' || ch == '"' || ch == '\n' || ch == '\r') ch = ' ';
  return w;
}

nlohmann::ordered_json Num(double v) {
  return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr);
}

constexpr const char *kColumns[] = {"schema_version", "round",          "accuracy",
                                    "loss",           "n_delivered",    "delivered",
                                    "mean_snr_db",    "harmonic_snr_db", "erasure_rate",
                                    "excluded_subcarriers", "comm_error_energy", "comm_bound",
                                    "client_weights", "bias_floor",     "warning"};
constexpr std::size_t kNumColumns = sizeof(kColumns) / sizeof(kColumns[0]);

}  // namespace

std::string CsvHeader() {
  std::string h;
  for (std::size_t i = 0; i < kNumColumns; ++i) {
    if (i) h += ',';
    h += kColumns[i];
  }
  return h;
}

std::string ToCsv(const std::vector<RoundRecord> &records) {
  std::ostringstream os;
  os << CsvHeader() << '\n';
  for (const auto &r : records) {
    os << kSchemaVersion << ',' << r.round << ',' << Fmt(r.accuracy) << ',' << Fmt(r.loss) << ','
       << r.n_delivered << ',' << JoinList(r.delivered, [](int v) { return std::to_string(v); }) << ','
       << Fmt(r.mean_snr_db) << ',' << Fmt(r.harmonic_snr_db) << ',' << Fmt(r.erasure_rate) << ','
       << r.excluded_subcarriers << ',' << Fmt(r.comm_error_energy) << ',' << Fmt(r.comm_bound) << ','
       << JoinList(r.client_weights, Fmt) << ',' << Fmt(r.bias_floor) << ','
       << CleanWarning(r.warning) << '\n';
  }
  return os.str();
}

std::vector<RoundRecord> ParseCsv(const std::string &text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != CsvHeader())
    throw Error(ErrorCode::kInvalidArgument, "CSV header does not match this schema version");
  std::vector<RoundRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = Split(line, ',');
    if (f.size() != kNumColumns) throw Error(ErrorCode::kInvalidArgument, "CSV row has the wrong field count");
    if (std::stoi(f[0]) != kSchemaVersion) throw Error(ErrorCode::kInvalidArgument, "unsupported schema_version");
    RoundRecord r;
    r.round = std::stoul(f[1]);
    r.accuracy = ParseDouble(f[2]);
    r.loss = ParseDouble(f[3]);
    r.n_delivered = std::stoul(f[4]);
    if (!f[5].empty())
      for (const auto &v : Split(f[5], ';')) r.delivered.push_back(std::stoi(v));
    r.mean_snr_db = ParseDouble(f[6]);
    r.harmonic_snr_db = ParseDouble(f[7]);
    r.erasure_rate = ParseDouble(f[8]);
    r.excluded_subcarriers = std::stoul(f[9]);
    r.comm_error_energy = ParseDouble(f[10]);
    r.comm_bound = ParseDouble(f[11]);
    if (!f[12].empty())
      for (const auto &v : Split(f[12], ';')) r.client_weights.push_back(ParseDouble(v));
    r.bias_floor = ParseDouble(f[13]);
    r.warning = f[14];
    out.push_back(std::move(r));
  }
  return out;
}

std::string ToJsonRecords(const std::vector<RoundRecord> &records, int indent) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto &r : records) {
    nlohmann::ordered_json j;
    j["schema_version"] = kSchemaVersion;
    j["round"] = r.round;
    j["accuracy"] = Num(r.accuracy);
    j["loss"] = Num(r.loss);
    j["n_delivered"] = r.n_delivered;
    j["delivered"] = r.delivered;
    j["mean_snr_db"] = Num(r.mean_snr_db);
    j["harmonic_snr_db"] = Num(r.harmonic_snr_db);
    j["erasure_rate"] = Num(r.erasure_rate);
    j["excluded_subcarriers"] = r.excluded_subcarriers;
    j["comm_error_energy"] = Num(r.comm_error_energy);
    j["comm_bound"] = Num(r.comm_bound);
    auto w = nlohmann::ordered_json::array();
    for (double v : r.client_weights) w.push_back(Num(v));
    j["client_weights"] = w;
    j["bias_floor"] = Num(r.bias_floor);
    j["warning"] = r.warning;
    arr.push_back(std::move(j));
  }
  return arr.dump(indent);
}

void EmitResults(const std::vector<RoundRecord> &records, const std::string &path,
                 OutputFormat format) {
  if (records.empty()) ThrowInvalid("no records to emit");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write results: " + path);
  if (format == OutputFormat::kCsv) out << ToCsv(records);
  else out << ToJsonRecords(records) << '\n';
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path);
}

}  // namespace thzfl::scenario
