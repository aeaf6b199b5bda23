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

// JSON config reading with full defaulting. Parsing never stops at the first
// problem: every unknown key, type mismatch and range violation is collected.

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "thzfl/scenario.hpp"

namespace thzfl::scenario {

namespace {

using nlohmann::json;
using ojson = nlohmann::ordered_json;

class Reader {
 public:
  std::vector<std::string> errors;

  // Returns the sub-object at key (or null json) after checking its keys.
  const json *Section(const json &parent, const char *key, const std::string &path,
                      std::initializer_list<const char *> allowed) {
    if (!parent.contains(key)) return nullptr;
    const json &j = parent.at(key);
    const std::string p = Join(path, key);
    if (!j.is_object()) {
      errors.push_back(p + ": expected an object");
      return nullptr;
    }
    Keys(j, p, allowed);
    return &j;
  }

  void Keys(const json &obj, const std::string &path, std::initializer_list<const char *> allowed) {
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (auto it = obj.begin(); it != obj.end(); ++it)
      if (!ok.count(it.key())) errors.push_back(Join(path, it.key().c_str()) + ": unknown key");
  }

  void Num(const json *obj, const char *key, const std::string &path, double &out) {
    if (!obj || !obj->contains(key)) return;
    const json &v = obj->at(key);
    if (!v.is_number()) {
      errors.push_back(Join(path, key) + ": expected a number");
      return;
    }
    out = v.get<double>();
  }

  void OptNum(const json *obj, const char *key, const std::string &path, std::optional<double> &out) {
    if (!obj || !obj->contains(key)) return;
    const json &v = obj->at(key);
    if (v.is_null()) {
      out.reset();
      return;
    }
    if (!v.is_number()) {
      errors.push_back(Join(path, key) + ": expected a number or null");
      return;
    }
    out = v.get<double>();
  }

  template <class T>
  void Int(const json *obj, const char *key, const std::string &path, T &out) {
    if (!obj || !obj->contains(key)) return;
    const json &v = obj->at(key);
    if (v.is_number_unsigned() || (v.is_number_integer() && v.get<long long>() >= 0)) {
      out = static_cast<T>(v.get<unsigned long long>());
    } else if (v.is_number_float() && v.get<double>() >= 0 && std::floor(v.get<double>()) == v.get<double>()) {
      out = static_cast<T>(v.get<double>());
    } else {
      errors.push_back(Join(path, key) + ": expected a non-negative integer");
    }
  }

  void Bool(const json *obj, const char *key, const std::string &path, bool &out) {
    if (!obj || !obj->contains(key)) return;
    const json &v = obj->at(key);
    if (!v.is_boolean()) {
      errors.push_back(Join(path, key) + ": expected true or false");
      return;
    }
    out = v.get<bool>();
  }

  void Str(const json *obj, const char *key, const std::string &path, std::string &out) {
    if (!obj || !obj->contains(key)) return;
    const json &v = obj->at(key);
    if (!v.is_string()) {
      errors.push_back(Join(path, key) + ": expected a string");
      return;
    }
    out = v.get<std::string>();
  }

  template <class E>
  void Enum(const json *obj, const char *key, const std::string &path, E &out,
            std::initializer_list<std::pair<const char *, E>> names) {
    if (!obj || !obj->contains(key)) return;
    const json &v = obj->at(key);
    std::string opts;
    for (const auto &[n, e] : names) {
      if (v.is_string() && v.get<std::string>() == n) {
        out = e;
        return;
      }
      opts += opts.empty() ? n : std::string("|") + n;
    }
    errors.push_back(Join(path, key) + ": expected one of " + opts);
  }

  static std::string Join(const std::string &path, const char *key) {
    return path.empty() ? std::string(key) : path + "." + key;
  }
};

constexpr std::initializer_list<const char *> kGeometryKeys = {
    "distance_m", "user_angle_rad", "steer_angle_rad", "n_antennas", "antenna_spacing_m",
    "squint_severity", "jitter_std_rad", "fading_var", "tx_power_w"};

void ReadGeometry(Reader &r, const json *g, const std::string &p, GeometryConfig &out) {
  r.Num(g, "distance_m", p, out.distance_m);
  r.Num(g, "user_angle_rad", p, out.user_angle_rad);
  r.Num(g, "steer_angle_rad", p, out.steer_angle_rad);
  r.Int(g, "n_antennas", p, out.n_antennas);
  r.Num(g, "antenna_spacing_m", p, out.antenna_spacing_m);
  r.Num(g, "squint_severity", p, out.squint_severity);
  r.Num(g, "jitter_std_rad", p, out.jitter_std_rad);
  r.Num(g, "fading_var", p, out.fading_var);
  r.Num(g, "tx_power_w", p, out.tx_power_w);
}

ojson GeometryJson(const GeometryConfig &g) {
  return {{"distance_m", g.distance_m},         {"user_angle_rad", g.user_angle_rad},
          {"steer_angle_rad", g.steer_angle_rad}, {"n_antennas", g.n_antennas},
          {"antenna_spacing_m", g.antenna_spacing_m}, {"squint_severity", g.squint_severity},
          {"jitter_std_rad", g.jitter_std_rad}, {"fading_var", g.fading_var},
          {"tx_power_w", g.tx_power_w}};
}

void CheckGeometry(const GeometryConfig &g, const std::string &p, std::vector<std::string> &v) {
  if (!(g.distance_m > 0.0)) v.push_back(p + ".distance_m: must be > 0");
  if (!(std::abs(g.user_angle_rad) < kPi / 2)) v.push_back(p + ".user_angle_rad: must lie in (-pi/2, pi/2)");
  if (!(std::abs(g.steer_angle_rad) < kPi / 2)) v.push_back(p + ".steer_angle_rad: must lie in (-pi/2, pi/2)");
  if (g.n_antennas < 1) v.push_back(p + ".n_antennas: must be >= 1");
  if (!(g.antenna_spacing_m >= 0.0)) v.push_back(p + ".antenna_spacing_m: must be >= 0 (0 = half wavelength)");
  if (!(g.squint_severity >= 0.0)) v.push_back(p + ".squint_severity: must be >= 0");
  if (!(g.jitter_std_rad >= 0.0)) v.push_back(p + ".jitter_std_rad: must be >= 0");
  if (!(g.fading_var >= 0.0)) v.push_back(p + ".fading_var: must be >= 0");
  if (!(g.tx_power_w >= 0.0) || !std::isfinite(g.tx_power_w)) v.push_back(p + ".tx_power_w: must be finite and >= 0");
}

std::vector<std::string> Violations(const ScenarioConfig &c) {
  std::vector<std::string> v;
  const auto &ph = c.physics;
  if (!(ph.center_freq_hz > 0.0)) v.push_back("physics.center_freq_hz: must be > 0");
  if (!(ph.bandwidth_hz > 0.0)) v.push_back("physics.bandwidth_hz: must be > 0");
  else if (!(ph.bandwidth_hz < 2.0 * ph.center_freq_hz)) v.push_back("physics.bandwidth_hz: must be below twice the carrier");
  if (ph.n_subcarriers < 1) v.push_back("physics.n_subcarriers: must be >= 1");
  if (!(ph.noise_temp_k > 0.0)) v.push_back("physics.noise_temp_k: must be > 0");
  if (!(ph.absorption_per_m >= 0.0)) v.push_back("physics.absorption_per_m: must be >= 0");
  if (!(ph.erasure_threshold >= 0.0)) v.push_back("physics.erasure_threshold: must be >= 0");
  CheckGeometry(ph.geometry, "physics.geometry", v);
  if (!ph.client_geometries.empty() && ph.client_geometries.size() != c.fl.n_clients)
    v.push_back("physics.client_geometries: length must equal fl.n_clients");
  for (std::size_t i = 0; i < ph.client_geometries.size(); ++i)
    CheckGeometry(ph.client_geometries[i], "physics.client_geometries[" + std::to_string(i) + "]", v);

  const auto &d = c.data;
  if (d.source != "synthetic" && d.source != "idx") v.push_back("data.source: expected synthetic|idx");
  if (d.source == "idx") {
    if (d.train_images.empty()) v.push_back("data.train_images: required for idx source");
    if (d.train_labels.empty()) v.push_back("data.train_labels: required for idx source");
    if (d.test_images.empty()) v.push_back("data.test_images: required for idx source");
    if (d.test_labels.empty()) v.push_back("data.test_labels: required for idx source");
  }
  if (d.n_train < c.fl.n_clients) v.push_back("data.n_train: must be >= fl.n_clients");
  if (d.n_test < 1) v.push_back("data.n_test: must be >= 1");
  if (d.input_dim < 1) v.push_back("data.input_dim: must be >= 1");
  if (d.n_classes < 2) v.push_back("data.n_classes: must be >= 2");
  if (!(d.separation >= 0.0)) v.push_back("data.separation: must be >= 0");
  if (!(d.dirichlet_beta > 0.0)) v.push_back("data.dirichlet_beta: must be > 0");

  const auto &f = c.fl;
  if (f.architecture == fl::Architecture::kMlp && f.hidden < 1) v.push_back("fl.hidden: must be >= 1");
  if (!(f.lr_local > 0.0) || !std::isfinite(f.lr_local)) v.push_back("fl.lr_local: must be finite and > 0");
  if (f.batch_size < 1) v.push_back("fl.batch_size: must be >= 1");
  if (f.local_epochs < 1) v.push_back("fl.local_epochs: must be >= 1");
  if (f.rounds < 1) v.push_back("fl.rounds: must be >= 1");
  if (f.n_clients < 1) v.push_back("fl.n_clients: must be >= 1");
  if (f.clients_per_round > f.n_clients) v.push_back("fl.clients_per_round: must be <= fl.n_clients");
  if (!std::isfinite(f.server_lr)) v.push_back("fl.server_lr: must be finite");

  const auto &l = c.link;
  if (l.bits > 30) v.push_back("link.bits: must be <= 30");
  if (l.pilot_window < 1) v.push_back("link.pilot_window: must be >= 1");
  if (l.pilot_length < 1) v.push_back("link.pilot_length: must be >= 1");
  if (!(l.floor_relative >= 0.0)) v.push_back("link.floor_relative: must be >= 0");
  if (l.floor_absolute && !(*l.floor_absolute > 0.0)) v.push_back("link.floor_absolute: must be > 0 when set");

  const auto &a = c.analysis;
  const std::pair<const char *, double> pos[] = {{"c0", a.c0}, {"c1", a.c1}, {"c2", a.c2}, {"c3", a.c3},
                                                 {"a1", a.a1}, {"a2", a.a2}, {"a3", a.a3},
                                                 {"epsilon", a.epsilon}};
  for (const auto &[n, val] : pos)
    if (!(val > 0.0)) v.push_back(std::string("analysis.") + n + ": must be > 0");
  if (a.L && !(*a.L > 0.0)) v.push_back("analysis.L: must be > 0 when set");
  if (a.G && !(*a.G >= 0.0)) v.push_back("analysis.G: must be >= 0 when set");
  if (a.sigma_sgd && !(*a.sigma_sgd >= 0.0)) v.push_back("analysis.sigma_sgd: must be >= 0 when set");
  if (a.f_gap && !(*a.f_gap >= 0.0)) v.push_back("analysis.f_gap: must be >= 0 when set");
  return v;
}

ojson Opt(const std::optional<double> &v) { return v ? ojson(*v) : ojson(nullptr); }

}  // namespace

channel::LinkGeometry GeometryConfig::ToLinkGeometry() const {
  channel::LinkGeometry g;
  g.distance_m = distance_m;
  g.user_angle_rad = user_angle_rad;
  g.steer_angle_rad = steer_angle_rad;
  g.n_antennas = n_antennas;
  g.antenna_spacing_m = antenna_spacing_m;
  g.squint_severity = squint_severity;
  g.jitter_std_rad = jitter_std_rad;
  g.fading_var = fading_var;
  g.tx_power_w = tx_power_w;
  return g;
}

fl::ModelSpec ScenarioConfig::model() const {
  fl::ModelSpec m;
  m.architecture = fl.architecture;
  m.input_dim = data.input_dim;
  m.hidden = fl.hidden;
  m.n_classes = data.n_classes;
  return m;
}

void Validate(const ScenarioConfig &config) {
  auto v = Violations(config);
  if (!v.empty()) throw ConfigError(std::move(v));
}

ScenarioConfig ParseConfig(const std::string &json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error &e) {
    throw ConfigError({std::string("config is not valid JSON: ") + e.what()});
  }
  if (!root.is_object()) throw ConfigError({"config root must be an object"});

  ScenarioConfig c;
  Reader r;
  r.Keys(root, "", {"name", "seed", "physics", "data", "fl", "link", "analysis", "schema_version"});
  r.Str(&root, "name", "", c.name);
  r.Int(&root, "seed", "", c.seed);

  if (const json *p = r.Section(root, "physics", "",
                                {"center_freq_hz", "bandwidth_hz", "n_subcarriers", "noise_temp_k",
                                 "absorption_per_m", "absorption_table", "erasure_threshold",
                                 "power_allocation", "geometry", "client_geometries"})) {
    auto &ph = c.physics;
    r.Num(p, "center_freq_hz", "physics", ph.center_freq_hz);
    r.Num(p, "bandwidth_hz", "physics", ph.bandwidth_hz);
    r.Int(p, "n_subcarriers", "physics", ph.n_subcarriers);
    r.Num(p, "noise_temp_k", "physics", ph.noise_temp_k);
    r.Num(p, "absorption_per_m", "physics", ph.absorption_per_m);
    r.Str(p, "absorption_table", "physics", ph.absorption_table);
    r.Num(p, "erasure_threshold", "physics", ph.erasure_threshold);
    r.Enum(p, "power_allocation", "physics", ph.power_allocation,
           {{"uniform", channel::PowerAllocation::kUniform},
            {"inverse_gain_sq", channel::PowerAllocation::kInverseGainSq}});
    if (const json *g = r.Section(*p, "geometry", "physics", kGeometryKeys))
      ReadGeometry(r, g, "physics.geometry", ph.geometry);
    if (p->contains("client_geometries")) {
      const json &arr = p->at("client_geometries");
      if (!arr.is_array()) {
        r.errors.push_back("physics.client_geometries: expected an array");
      } else {
        for (std::size_t i = 0; i < arr.size(); ++i) {
          const std::string path = "physics.client_geometries[" + std::to_string(i) + "]";
          GeometryConfig g = ph.geometry;  // entries override the shared geometry
          if (!arr[i].is_object()) {
            r.errors.push_back(path + ": expected an object");
          } else {
            r.Keys(arr[i], path, kGeometryKeys);
            ReadGeometry(r, &arr[i], path, g);
          }
          ph.client_geometries.push_back(g);
        }
      }
    }
  }

  if (const json *d = r.Section(root, "data", "",
                                {"source", "train_images", "train_labels", "test_images",
                                 "test_labels", "n_train", "n_test", "input_dim", "n_classes",
                                 "separation", "shard", "dirichlet_beta"})) {
    auto &dc = c.data;
    r.Str(d, "source", "data", dc.source);
    r.Str(d, "train_images", "data", dc.train_images);
    r.Str(d, "train_labels", "data", dc.train_labels);
    r.Str(d, "test_images", "data", dc.test_images);
    r.Str(d, "test_labels", "data", dc.test_labels);
    r.Int(d, "n_train", "data", dc.n_train);
    r.Int(d, "n_test", "data", dc.n_test);
    r.Int(d, "input_dim", "data", dc.input_dim);
    r.Int(d, "n_classes", "data", dc.n_classes);
    r.Num(d, "separation", "data", dc.separation);
    r.Enum(d, "shard", "data", dc.shard,
           {{"iid", data::ShardStrategy::kIid}, {"dirichlet", data::ShardStrategy::kDirichlet}});
    r.Num(d, "dirichlet_beta", "data", dc.dirichlet_beta);
  }

  if (const json *f = r.Section(root, "fl", "",
                                {"architecture", "hidden", "lr_local", "batch_size", "local_epochs",
                                 "rounds", "n_clients", "clients_per_round", "server_lr",
                                 "aggregation"})) {
    auto &fc = c.fl;
    r.Enum(f, "architecture", "fl", fc.architecture,
           {{"mlp", fl::Architecture::kMlp}, {"logistic", fl::Architecture::kLogistic}});
    r.Int(f, "hidden", "fl", fc.hidden);
    r.Num(f, "lr_local", "fl", fc.lr_local);
    r.Int(f, "batch_size", "fl", fc.batch_size);
    r.Int(f, "local_epochs", "fl", fc.local_epochs);
    r.Int(f, "rounds", "fl", fc.rounds);
    r.Int(f, "n_clients", "fl", fc.n_clients);
    r.Int(f, "clients_per_round", "fl", fc.clients_per_round);
    r.Num(f, "server_lr", "fl", fc.server_lr);
    r.Enum(f, "aggregation", "fl", fc.aggregation,
           {{"uniform", fl::AggregationMode::kUniform},
            {"snr_weighted", fl::AggregationMode::kSnrWeighted}});
  }

  if (const json *l = r.Section(root, "link", "",
                                {"bits", "pilot_window", "pilot_length", "floor_relative",
                                 "floor_absolute", "interleaving", "compensation",
                                 "pilot_shares_fading", "exact_csi", "transparent"})) {
    auto &lc = c.link;
    r.Int(l, "bits", "link", lc.bits);
    r.Int(l, "pilot_window", "link", lc.pilot_window);
    r.Int(l, "pilot_length", "link", lc.pilot_length);
    r.Num(l, "floor_relative", "link", lc.floor_relative);
    r.OptNum(l, "floor_absolute", "link", lc.floor_absolute);
    r.Bool(l, "interleaving", "link", lc.interleaving);
    r.Bool(l, "compensation", "link", lc.compensation);
    r.Bool(l, "pilot_shares_fading", "link", lc.pilot_shares_fading);
    r.Bool(l, "exact_csi", "link", lc.exact_csi);
    r.Bool(l, "transparent", "link", lc.transparent);
  }

  if (const json *a = r.Section(root, "analysis", "",
                                {"L", "G", "sigma_sgd", "f_gap", "c0", "c1", "c2", "c3", "a1",
                                 "a2", "a3", "epsilon", "kappa"})) {
    auto &ac = c.analysis;
    r.OptNum(a, "L", "analysis", ac.L);
    r.OptNum(a, "G", "analysis", ac.G);
    r.OptNum(a, "sigma_sgd", "analysis", ac.sigma_sgd);
    r.OptNum(a, "f_gap", "analysis", ac.f_gap);
    r.Num(a, "c0", "analysis", ac.c0);
    r.Num(a, "c1", "analysis", ac.c1);
    r.Num(a, "c2", "analysis", ac.c2);
    r.Num(a, "c3", "analysis", ac.c3);
    r.Num(a, "a1", "analysis", ac.a1);
    r.Num(a, "a2", "analysis", ac.a2);
    r.Num(a, "a3", "analysis", ac.a3);
    r.Num(a, "epsilon", "analysis", ac.epsilon);
    r.Num(a, "kappa", "analysis", ac.kappa);
  }

  auto errors = std::move(r.errors);
  for (auto &v : Violations(c)) errors.push_back(std::move(v));
  if (!errors.empty()) throw ConfigError(std::move(errors));
  return c;
}

ScenarioConfig LoadConfig(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open config: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ParseConfig(ss.str());
}

std::string ToJson(const ScenarioConfig &c, int indent) {
  ojson j;
  j["schema_version"] = kSchemaVersion;
  j["name"] = c.name;
  j["seed"] = c.seed;
  const auto &ph = c.physics;
  ojson geos = ojson::array();
  for (const auto &g : ph.client_geometries) geos.push_back(GeometryJson(g));
  j["physics"] = {{"center_freq_hz", ph.center_freq_hz},
                  {"bandwidth_hz", ph.bandwidth_hz},
                  {"n_subcarriers", ph.n_subcarriers},
                  {"noise_temp_k", ph.noise_temp_k},
                  {"absorption_per_m", ph.absorption_per_m},
                  {"absorption_table", ph.absorption_table},
                  {"erasure_threshold", ph.erasure_threshold},
                  {"power_allocation", ph.power_allocation == channel::PowerAllocation::kUniform
                                           ? "uniform"
                                           : "inverse_gain_sq"},
                  {"geometry", GeometryJson(ph.geometry)},
                  {"client_geometries", geos}};
  const auto &d = c.data;
  j["data"] = {{"source", d.source},
               {"train_images", d.train_images},
               {"train_labels", d.train_labels},
               {"test_images", d.test_images},
               {"test_labels", d.test_labels},
               {"n_train", d.n_train},
               {"n_test", d.n_test},
               {"input_dim", d.input_dim},
               {"n_classes", d.n_classes},
               {"separation", d.separation},
               {"shard", d.shard == data::ShardStrategy::kIid ? "iid" : "dirichlet"},
               {"dirichlet_beta", d.dirichlet_beta}};
  const auto &f = c.fl;
  j["fl"] = {{"architecture", f.architecture == fl::Architecture::kMlp ? "mlp" : "logistic"},
             {"hidden", f.hidden},
             {"lr_local", f.lr_local},
             {"batch_size", f.batch_size},
             {"local_epochs", f.local_epochs},
             {"rounds", f.rounds},
             {"n_clients", f.n_clients},
             {"clients_per_round", f.clients_per_round},
             {"server_lr", f.server_lr},
             {"aggregation", f.aggregation == fl::AggregationMode::kUniform ? "uniform" : "snr_weighted"}};
  const auto &l = c.link;
  j["link"] = {{"bits", l.bits},
               {"pilot_window", l.pilot_window},
               {"pilot_length", l.pilot_length},
               {"floor_relative", l.floor_relative},
               {"floor_absolute", Opt(l.floor_absolute)},
               {"interleaving", l.interleaving},
               {"compensation", l.compensation},
               {"pilot_shares_fading", l.pilot_shares_fading},
               {"exact_csi", l.exact_csi},
               {"transparent", l.transparent}};
  const auto &a = c.analysis;
  j["analysis"] = {{"L", Opt(a.L)},   {"G", Opt(a.G)},   {"sigma_sgd", Opt(a.sigma_sgd)},
                   {"f_gap", Opt(a.f_gap)}, {"c0", a.c0}, {"c1", a.c1},
                   {"c2", a.c2},      {"c3", a.c3},      {"a1", a.a1},
                   {"a2", a.a2},      {"a3", a.a3},      {"epsilon", a.epsilon},
                   {"kappa", a.kappa}};
  return j.dump(indent);
}

}  // namespace thzfl::scenario
