// Copyright 2026 The dqnn Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dqnn/experiment.hpp"

#include "dqnn/ed_oracle.hpp"
#include "dqnn/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#ifndef DQNN_GIT_DESCRIBE
#define DQNN_GIT_DESCRIBE "unknown"
#endif

namespace dqnn {

using nlohmann::json;

namespace {

const std::map<std::string, std::vector<std::string>>& schema() {
  static const std::map<std::string, std::vector<std::string>> s{
      {"model", {"kind", "n_sites", "lx", "ly", "J", "J1", "J2", "h", "gamma", "periodic"}},
      {"network", {"layer_sizes", "connectivity", "tying", "fresh_state"}},
      {"solver",
       {"mode", "lr0", "lr_decay", "dt", "max_steps", "tikhonov_eps", "noise_eps", "noise_target",
        "seed", "backend", "mcmc_samples", "mcmc_burn_in_sweeps", "mcmc_batches", "shots",
        "shot_batches",
        "convergence_tol", "stop_at_tol", "init_scale"}},
      {"sweep", {"parameter", "values"}},
      {"output", {"directory", "formats", "observables"}},
  };
  return s;
}

// Names people reach for that are spelled differently here.
const std::map<std::string, std::string>& aliases() {
  static const std::map<std::string, std::string> a{
      {"learning_rate_sched", "lr_decay"}, {"learning_rate_schedule", "lr_decay"},
      {"lr_schedule", "lr_decay"},         {"decay", "lr_decay"},
      {"learning_rate", "lr0"},            {"lr", "lr0"},
      {"time_step", "dt"},                 {"timestep", "dt"},
      {"steps", "max_steps"},              {"iterations", "max_steps"},
      {"n_steps", "max_steps"},            {"n", "n_sites"},
      {"sites", "n_sites"},                {"layers", "layer_sizes"},
      {"topology", "layer_sizes"},         {"noise", "noise_eps"},
      {"epsilon_r", "noise_eps"},          {"samples", "mcmc_samples"},
      {"n_samples", "mcmc_samples"},       {"tol", "convergence_tol"},
      {"tolerance", "convergence_tol"},    {"regularization", "tikhonov_eps"},
      {"eps", "tikhonov_eps"},             {"rate", "gamma"},
      {"dissipation", "gamma"},            {"boundary", "periodic"},
      {"dir", "directory"},                {"out", "directory"},
      {"field", "h"},                      {"coupling", "J"},
  };
  return a;
}

std::size_t levenshtein(const std::string& a, const std::string& b) {
  std::vector<std::size_t> prev(b.size() + 1);
  std::vector<std::size_t> cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

// Collects problems while reading one section.
class Reader {
 public:
  Reader(const json& doc, std::string section, std::vector<std::string>& problems)
      : section_(std::move(section)), problems_(problems) {
    if (doc.contains(section_)) {
      if (doc[section_].is_object()) {
        obj_ = doc[section_];
      } else {
        problems_.push_back(section_ + ": must be an object");
      }
    }
    for (const auto& [key, _] : obj_.items()) {
      const auto& known = schema().at(section_);
      if (std::find(known.begin(), known.end(), key) != known.end()) continue;
      std::string msg = path(key) + ": unknown key";
      const std::string hint = suggest_key(key, known);
      if (!hint.empty()) {
        msg += "; did you mean \"" + hint + "\"?";
      } else {
        for (const auto& [other, keys] : schema()) {
          if (other != section_ && std::find(keys.begin(), keys.end(), key) != keys.end()) {
            msg += "; \"" + key + "\" belongs in " + other + "." + key;
            break;
          }
        }
      }
      problems_.push_back(msg);
    }
  }

  bool has(const std::string& key) const { return obj_.contains(key); }
  std::string path(const std::string& key) const { return section_ + "." + key; }
  void fail(const std::string& key, const std::string& what) { problems_.push_back(path(key) + ": " + what); }

  double number(const std::string& key, double def) {
    if (!has(key)) return def;
    const auto& v = obj_[key];
    if (!v.is_number()) {
      fail(key, "expected a number");
      return def;
    }
    const double x = v.get<double>();
    if (!std::isfinite(x)) fail(key, "must be finite");
    return x;
  }

  long long integer(const std::string& key, long long def) {
    if (!has(key)) return def;
    const auto& v = obj_[key];
    if (!v.is_number_integer()) {
      fail(key, "expected an integer");
      return def;
    }
    return v.get<long long>();
  }

  bool boolean(const std::string& key, bool def) {
    if (!has(key)) return def;
    const auto& v = obj_[key];
    if (!v.is_boolean()) {
      fail(key, "expected true or false");
      return def;
    }
    return v.get<bool>();
  }

  std::string text(const std::string& key, const std::string& def) {
    if (!has(key)) return def;
    const auto& v = obj_[key];
    if (!v.is_string()) {
      fail(key, "expected a string");
      return def;
    }
    return v.get<std::string>();
  }

  // String restricted to a fixed set of spellings.
  std::string choice(const std::string& key, const std::string& def,
                     const std::vector<std::string>& allowed) {
    const std::string v = text(key, def);
    if (std::find(allowed.begin(), allowed.end(), v) == allowed.end()) {
      std::string list;
      for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
      fail(key, "\"" + v + "\" is not one of {" + list + "}");
      return def;
    }
    return v;
  }

  const json& raw(const std::string& key) const { return obj_.at(key); }

 private:
  std::string section_;
  std::vector<std::string>& problems_;
  json obj_ = json::object();
};

std::string connectivity_name(Connectivity c) { return c == Connectivity::Full ? "full" : "local_modulo"; }
std::string tying_name(Tying t) { return t == Tying::Untied ? "untied" : "tied_per_layer"; }
std::string fresh_name(FreshState f) { return f == FreshState::Zero ? "zero" : "plus"; }
std::string mode_name(Mode m) { return m == Mode::Dynamics ? "dynamics" : "steady"; }
std::string backend_name(Backend b) {
  switch (b) {
    case Backend::Mcmc: return "mcmc";
    case Backend::Shots: return "shots";
    default: return "exact";
  }
}
std::string noise_target_name(NoiseTarget t) {
  return t == NoiseTarget::SrEntries ? "sr_entries" : "derivatives";
}

void set_path(json& doc, const std::string& dotted, const json& value) {
  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = dotted.find('.', start);
    const std::string part = dotted.substr(start, dot == std::string::npos ? dotted.npos : dot - start);
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    if (!node->contains(part) || !(*node)[part].is_object()) (*node)[part] = json::object();
    node = &(*node)[part];
    start = dot + 1;
  }
}

json effective_json(const ExperimentConfig& c) {
  json j;
  const auto& m = c.model;
  j["model"] = {{"kind", m.kind}, {"n_sites", m.n_sites}, {"periodic", m.periodic},
                {"h", m.h},       {"gamma", m.gamma}};
  if (m.kind == "ising1d") j["model"]["J"] = m.j;
  if (m.kind == "j1j2_2d") {
    j["model"]["lx"] = m.lx;
    j["model"]["ly"] = m.ly;
    j["model"]["J1"] = m.j1;
    j["model"]["J2"] = m.j2;
  }
  j["network"] = {{"layer_sizes", c.network.layer_sizes},
                  {"connectivity", connectivity_name(c.network.connectivity)},
                  {"tying", tying_name(c.network.tying)},
                  {"fresh_state", fresh_name(c.network.fresh_state)}};
  const auto& s = c.solver;
  j["solver"] = {{"mode", mode_name(s.mode)},
                 {"lr0", s.lr0},
                 {"lr_decay", s.lr_decay},
                 {"dt", s.dt},
                 {"max_steps", s.max_steps},
                 {"tikhonov_eps", s.tikhonov_eps},
                 {"noise_eps", s.noise_eps},
                 {"noise_target", noise_target_name(s.noise_target)},
                 {"seed", s.seed},
                 {"backend", backend_name(s.backend)},
                 {"mcmc_samples", s.mcmc.n_samples},
                 {"mcmc_burn_in_sweeps", s.mcmc.burn_in_sweeps},
                 {"mcmc_batches", s.mcmc.n_batches},
                 {"shots", s.shots.shots},
                 {"shot_batches", s.shots.batches},
                 {"convergence_tol", s.convergence_tol},
                 {"stop_at_tol", s.stop_at_tol},
                 {"init_scale", s.init_scale}};
  if (c.sweep) j["sweep"] = {{"parameter", c.sweep->parameter}, {"values", c.sweep->values}};
  json formats = json::array();
  if (c.output.csv) formats.push_back("csv");
  if (c.output.json) formats.push_back("json");
  j["output"] = {{"directory", c.output.directory},
                 {"formats", formats},
                 {"observables", c.output.observables}};
  return j;
}

const std::vector<std::string> kObservableNames{"sx_mean", "sy_mean", "sz_mean", "sxsx_01", "szsz_01"};

void write_text(const std::filesystem::path& p, const std::string& body) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << body;
  if (!out) throw std::runtime_error("write failed for " + p.string());
}

std::string hex64(std::uint64_t x) {
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << x;
  return os.str();
}

std::string reference_csv(const ExperimentConfig& cfg, const std::vector<double>& values,
                          std::uint64_t hash) {
  std::string s = "observable,value,model_hash\n";
  for (std::size_t i = 0; i < values.size(); ++i) {
    s += cfg.output.observables[i] + "," + format_double(values[i]) + "," + hex64(hash) + "\n";
  }
  return s;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> problems)
    : std::runtime_error([&] {
        std::string msg = "invalid config:";
        for (const auto& p : problems) msg += "\n  " + p;
        return msg;
      }()),
      problems_(std::move(problems)) {}

std::string suggest_key(const std::string& unknown, const std::vector<std::string>& known) {
  const std::string key = lower(unknown);
  const auto it = aliases().find(key);
  if (it != aliases().end() && std::find(known.begin(), known.end(), it->second) != known.end()) {
    return it->second;
  }
  std::string best;
  std::size_t best_d = std::max<std::size_t>(2, key.size() / 3) + 1;
  for (const auto& k : known) {
    const std::size_t d = levenshtein(key, lower(k));
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  return best;
}

ExperimentConfig config_from_json(json doc) {
  std::vector<std::string> problems;
  ExperimentConfig cfg;
  if (!doc.is_object()) throw ConfigError({"document: top level must be an object"});
  for (const auto& [key, _] : doc.items()) {
    if (schema().count(key)) continue;
    std::vector<std::string> sections;
    for (const auto& [s, __] : schema()) sections.push_back(s);
    const std::string hint = suggest_key(key, sections);
    problems.push_back(key + ": unknown section" +
                       (hint.empty() ? std::string() : "; did you mean \"" + hint + "\"?"));
  }

  // model
  Reader mr(doc, "model", problems);
  auto& m = cfg.model;
  m.kind = mr.choice("kind", "ising1d", {"ising1d", "j1j2_2d", "single_site"});
  m.j = mr.number("J", 1.0);
  m.j1 = mr.number("J1", 1.0);
  m.j2 = mr.number("J2", 0.5);
  m.h = mr.number("h", 1.0);
  m.gamma = mr.number("gamma", 1.0);
  m.periodic = mr.boolean("periodic", true);
  m.lx = static_cast<int>(mr.integer("lx", 2));
  m.ly = static_cast<int>(mr.integer("ly", 2));
  if (m.gamma < 0.0) mr.fail("gamma", "must be >= 0");
  if (m.kind == "ising1d") {
    if (!mr.has("n_sites")) {
      mr.fail("n_sites", "required for ising1d");
    } else {
      m.n_sites = static_cast<int>(mr.integer("n_sites", 0));
      if (m.n_sites < 2) mr.fail("n_sites", "must be >= 2");
    }
  } else if (m.kind == "j1j2_2d") {
    if (m.lx < 2) mr.fail("lx", "must be >= 2");
    if (m.ly < 2) mr.fail("ly", "must be >= 2");
    m.n_sites = m.lx * m.ly;
    if (mr.has("n_sites") && mr.integer("n_sites", m.n_sites) != m.n_sites) {
      mr.fail("n_sites", "must equal model.lx * model.ly = " + std::to_string(m.n_sites));
    }
  } else {
    m.n_sites = 1;
    if (mr.has("n_sites") && mr.integer("n_sites", 1) != 1) mr.fail("n_sites", "must be 1 for single_site");
  }

  // network
  Reader nr(doc, "network", problems);
  auto& n = cfg.network;
  if (!nr.has("layer_sizes")) {
    nr.fail("layer_sizes", "required");
  } else if (!nr.raw("layer_sizes").is_array()) {
    nr.fail("layer_sizes", "expected an array of integers");
  } else {
    for (const auto& v : nr.raw("layer_sizes")) {
      if (!v.is_number_integer()) {
        nr.fail("layer_sizes", "expected an array of integers");
        n.layer_sizes.clear();
        break;
      }
      n.layer_sizes.push_back(v.get<int>());
    }
  }
  n.connectivity = nr.choice("connectivity", "local_modulo", {"local_modulo", "full"}) == "full"
                       ? Connectivity::Full
                       : Connectivity::LocalModulo;
  n.tying = nr.choice("tying", "tied_per_layer", {"tied_per_layer", "untied"}) == "untied"
                ? Tying::Untied
                : Tying::TiedPerLayer;
  n.fresh_state = nr.choice("fresh_state", "plus", {"plus", "zero"}) == "zero" ? FreshState::Zero
                                                                             : FreshState::Plus;
  if (!n.layer_sizes.empty()) {
    try {
      (void)build_topology(n);
    } catch (const std::exception& e) {
      nr.fail("layer_sizes", e.what());
    }
    if (m.n_sites > 0 && n.layer_sizes.back() != m.n_sites) {
      problems.push_back("network.layer_sizes: output layer has " +
                         std::to_string(n.layer_sizes.back()) + " qubits but model.n_sites is " +
                         std::to_string(m.n_sites));
    }
  }

  // solver
  Reader sr(doc, "solver", problems);
  auto& s = cfg.solver;
  s.mode = sr.choice("mode", "steady", {"steady", "dynamics"}) == "dynamics" ? Mode::Dynamics
                                                                          : Mode::SteadyState;
  s.lr0 = sr.number("lr0", 0.01);
  s.lr_decay = sr.number("lr_decay", 0.999);
  s.dt = sr.number("dt", 5e-3);
  s.max_steps = static_cast<int>(sr.integer("max_steps", 2000));
  s.tikhonov_eps = sr.number("tikhonov_eps", 1e-4);
  s.noise_eps = sr.number("noise_eps", 0.0);
  s.noise_target = sr.choice("noise_target", "derivatives", {"derivatives", "sr_entries"}) == "sr_entries"
                       ? NoiseTarget::SrEntries
                       : NoiseTarget::Derivatives;
  if (!sr.has("seed")) {
    sr.fail("seed", "required");
  } else if (!sr.raw("seed").is_number_unsigned() && !(sr.raw("seed").is_number_integer() &&
                                                         sr.raw("seed").get<long long>() >= 0)) {
    sr.fail("seed", "expected a non-negative integer");
  } else {
    s.seed = sr.raw("seed").get<std::uint64_t>();
  }
  const std::string backend = sr.choice("backend", "exact", {"exact", "mcmc", "shots"});
  s.backend = backend == "mcmc" ? Backend::Mcmc : backend == "shots" ? Backend::Shots : Backend::Exact;
  s.mcmc.n_samples = sr.integer("mcmc_samples", 50000);
  s.mcmc.burn_in_sweeps = static_cast<int>(sr.integer("mcmc_burn_in_sweeps", -1));
  s.mcmc.n_batches = static_cast<int>(sr.integer("mcmc_batches", 0));
  s.shots.shots = sr.integer("shots", 0);
  s.shots.batches = static_cast<int>(sr.integer("shot_batches", 0));
  s.convergence_tol = sr.number("convergence_tol", 1e-2);
  s.stop_at_tol = sr.boolean("stop_at_tol", true);
  s.init_scale = sr.number("init_scale", 0.01);
  if (!(s.lr0 > 0.0)) sr.fail("lr0", "must be > 0");
  if (!(s.lr_decay > 0.0 && s.lr_decay <= 1.0)) sr.fail("lr_decay", "must be in (0, 1]");
  if (!(s.dt > 0.0)) sr.fail("dt", "must be > 0");
  if (s.max_steps < 0) sr.fail("max_steps", "must be >= 0");
  if (s.tikhonov_eps < 0.0) sr.fail("tikhonov_eps", "must be >= 0");
  if (s.noise_eps < 0.0) sr.fail("noise_eps", "must be >= 0");
  if (s.mcmc.n_samples < 1) sr.fail("mcmc_samples", "must be >= 1");
  if (s.mcmc.n_batches < 0 || s.mcmc.n_batches == 1) sr.fail("mcmc_batches", "must be 0 or >= 2");
  if (s.shots.shots < 0) sr.fail("shots", "must be >= 0 (0 means exact probabilities)");
  if (s.shots.batches < 0 || s.shots.batches == 1 || (s.shots.shots > 0 && s.shots.batches > s.shots.shots)) {
    sr.fail("shot_batches", "must be 0 or in [2, shots]");
  }
  if (!(s.convergence_tol > 0.0)) sr.fail("convergence_tol", "must be > 0");
  if (s.init_scale < 0.0) sr.fail("init_scale", "must be >= 0");
  if (s.backend == Backend::Shots && s.noise_eps > 0.0 && s.noise_target == NoiseTarget::Derivatives) {
    sr.fail("noise_target", "the shots backend has no derivative matrices; use \"sr_entries\"");
  }

  // output
  Reader orr(doc, "output", problems);
  auto& o = cfg.output;
  o.directory = orr.text("directory", "");
  if (orr.has("formats")) {
    const auto& f = orr.raw("formats");
    o.csv = o.json = false;
    if (!f.is_array()) {
      orr.fail("formats", "expected an array drawn from {csv, json}");
    } else {
      for (const auto& v : f) {
        const std::string name = v.is_string() ? v.get<std::string>() : std::string();
        if (name == "csv") {
          o.csv = true;
        } else if (name == "json") {
          o.json = true;
        } else {
          orr.fail("formats", "entries must be \"csv\" or \"json\"");
        }
      }
    }
  }
  if (orr.has("observables")) {
    const auto& f = orr.raw("observables");
    o.observables.clear();
    if (!f.is_array()) {
      orr.fail("observables", "expected an array of names");
    } else {
      for (const auto& v : f) {
        const std::string name = v.is_string() ? v.get<std::string>() : std::string();
        if (std::find(kObservableNames.begin(), kObservableNames.end(), name) == kObservableNames.end()) {
          const std::string hint = suggest_key(name, kObservableNames);
          orr.fail("observables", "unknown observable \"" + name + "\"" +
                                      (hint.empty() ? std::string() : "; did you mean \"" + hint + "\"?"));
        } else {
          o.observables.push_back(name);
        }
      }
    }
  }
  if (m.n_sites == 1) {
    for (const auto& name : o.observables) {
      if (name.find("_01") != std::string::npos) {
        orr.fail("observables", name + " needs at least two sites");
      }
    }
  }

  // sweep
  if (doc.contains("sweep")) {
    Reader wr(doc, "sweep", problems);
    SweepSection sw;
    sw.parameter = wr.text("parameter", "");
    const auto dot = sw.parameter.find('.');
    const std::string sec = dot == std::string::npos ? "" : sw.parameter.substr(0, dot);
    const std::string key = dot == std::string::npos ? "" : sw.parameter.substr(dot + 1);
    const bool known = (sec == "model" || sec == "network" || sec == "solver") &&
                       std::find(schema().at(sec).begin(), schema().at(sec).end(), key) !=
                           schema().at(sec).end();
    if (!known) wr.fail("parameter", "\"" + sw.parameter + "\" is not a model, network or solver key");
    if (!wr.has("values") || !wr.raw("values").is_array() || wr.raw("values").empty()) {
      wr.fail("values", "expected a non-empty array");
    } else {
      sw.values = wr.raw("values").get<std::vector<json>>();
    }
    if (known && problems.empty()) {
      for (std::size_t i = 0; i < sw.values.size(); ++i) {
        json point = doc;
        point.erase("sweep");
        set_path(point, sw.parameter, sw.values[i]);
        try {
          (void)config_from_json(point);
        } catch (const ConfigError& e) {
          for (const auto& p : e.problems()) {
            problems.push_back("sweep.values[" + std::to_string(i) + "]: " + p);
          }
        }
      }
    }
    cfg.sweep = std::move(sw);
  }

  if (!problems.empty()) throw ConfigError(std::move(problems));
  cfg.solver.validate();
  cfg.effective = effective_json(cfg);
  return cfg;
}

ExperimentConfig parse_config(const std::string& text, const json& overrides) {
  json doc;
  try {
    doc = json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError({std::string("syntax error: ") + e.what()});
  }
  if (!doc.is_object()) throw ConfigError({"document: top level must be an object"});
  for (const auto& [key, value] : overrides.items()) set_path(doc, key, value);
  return config_from_json(std::move(doc));
}

LindbladModel build_model(const ModelSection& m) {
  if (m.kind == "ising1d") return build_ising1d(m.n_sites, m.j, m.h, m.gamma, m.periodic);
  if (m.kind == "j1j2_2d") return build_j1j2_2d(m.lx, m.ly, m.j1, m.j2, m.h, m.gamma, m.periodic);
  if (m.kind == "single_site") return build_single_site(m.h, m.gamma);
  throw std::invalid_argument("unknown model kind " + m.kind);
}

NetworkTopology build_topology(const NetworkSection& n) {
  return NetworkTopology(n.layer_sizes, n.connectivity, n.tying, n.fresh_state);
}

Observable named_observable(const std::string& name, int n_sites) {
  Observable o{name, {}};
  const double w = 1.0 / n_sites;
  auto mean = [&](Pauli p) {
    for (int j = 0; j < n_sites; ++j) o.terms.push_back(PauliString::single(n_sites, j, p, w));
  };
  if (name == "sx_mean") {
    mean(Pauli::X);
  } else if (name == "sy_mean") {
    mean(Pauli::Y);
  } else if (name == "sz_mean") {
    mean(Pauli::Z);
  } else if (name == "sxsx_01" || name == "szsz_01") {
    if (n_sites < 2) throw DimensionError(name + " needs at least two sites");
    const Pauli p = name == "sxsx_01" ? Pauli::X : Pauli::Z;
    o.terms.push_back(PauliString::pair(n_sites, 0, p, 1, p));
  } else {
    throw std::invalid_argument("unknown observable " + name);
  }
  return o;
}

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

std::string config_hash(const ExperimentConfig& cfg) {
  json j = cfg.effective;
  j["output"].erase("directory");
  return hex64(fnv1a(j.dump()));
}

std::string build_version() { return DQNN_GIT_DESCRIBE; }

std::vector<double> reference_values(const ExperimentConfig& cfg, const LindbladModel& m) {
  const DensityMatrix ss = steady_state(m);
  std::vector<double> out;
  for (const auto& name : cfg.output.observables) {
    out.push_back(expectation(ss, named_observable(name, m.n_sites)));
  }
  return out;
}

PointOutcome run_point(const ExperimentConfig& cfg, const std::filesystem::path& dir, bool quiet) {
  std::filesystem::create_directories(dir);
  const LindbladModel m = build_model(cfg.model);
  const NetworkTopology topo = build_topology(cfg.network);
  std::vector<Observable> obs;
  for (const auto& name : cfg.output.observables) obs.push_back(named_observable(name, m.n_sites));
  const bool steady = cfg.solver.mode == Mode::SteadyState;
  const bool have_ref = m.n_sites <= kOracleMaxSites;
  const std::vector<double> ref = have_ref ? reference_values(cfg, m) : std::vector<double>{};

  const RecordCallback progress = [&](const TrajectoryRecord& r) {
    if (!quiet && r.step % 100 == 0) {
      std::cerr << dir.filename().string() << " step " << r.step << " |dL| "
                << std::hypot(r.deltaL_re, r.deltaL_im) << "\n";
    }
    return true;
  };
  const RunResult res = run(cfg.solver, m, topo, obs, progress);

  PointOutcome out;
  out.directory = dir;
  out.aborted = res.aborted;
  out.converged = res.converged;

  if (cfg.output.csv) {
    std::string csv = "step,time";
    for (const auto& name : cfg.output.observables) csv += "," + name;
    csv += ",deltaL_re,deltaL_im,sr_residual\n";
    for (const auto& r : res.records) {
      csv += std::to_string(r.step) + ",";
      if (!steady) csv += format_double(r.time);
      for (double v : r.observables) csv += "," + format_double(v);
      csv += "," + format_double(r.deltaL_re) + "," + format_double(r.deltaL_im) + "," +
             format_double(r.sr_residual) + "\n";
    }
    write_text(dir / "trajectory.csv", csv);
    if (have_ref) write_text(dir / "reference.csv", reference_csv(cfg, ref, model_hash(m)));
  }

  json s;
  s["config"] = cfg.effective;
  s["git_describe"] = build_version();
  s["seed"] = cfg.solver.seed;
  s["backend"] = backend_name(cfg.solver.backend);
  s["mode"] = mode_name(cfg.solver.mode);
  s["model_hash"] = hex64(model_hash(m));
  s["merged_duplicate_bonds"] = m.merged_duplicate_bonds;
  s["n_params"] = topo.n_params();
  s["steps_run"] = res.records.empty() ? 0 : res.records.back().step;
  s["converged"] = res.converged;
  s["aborted"] = res.aborted;
  if (!res.diagnostic.empty()) s["diagnostic"] = res.diagnostic;
  if (!res.records.empty()) {
    const auto& last = res.records.back();
    s["deltaL_re"] = last.deltaL_re;
    s["deltaL_im"] = last.deltaL_im;
    s["deltaL_abs"] = std::hypot(last.deltaL_re, last.deltaL_im);
    json fin = json::object();
    for (std::size_t i = 0; i < obs.size(); ++i) fin[obs[i].name] = last.observables[i];
    s["final"] = fin;
    if (have_ref) {
      json refj = json::object();
      json abs_err = json::object();
      json rel_err = json::object();
      for (std::size_t i = 0; i < obs.size(); ++i) {
        const double d = std::abs(last.observables[i] - ref[i]);
        refj[obs[i].name] = ref[i];
        abs_err[obs[i].name] = d;
        // Relative error is undefined against a vanishing reference.
        if (std::abs(ref[i]) > 1e-12) rel_err[obs[i].name] = d / std::abs(ref[i]);
      }
      s["reference"] = refj;
      s["abs_error"] = abs_err;
      s["relative_error"] = rel_err;
    }
  }
  if (!steady && have_ref && !res.records.empty()) {
    const DensityMatrix rho0 = feedforward(topo, initial_params(topo, cfg.solver.seed, cfg.solver.init_scale));
    const int steps = res.records.back().step;
    const auto traj = evolve_rk4(m, rho0, cfg.solver.dt, steps);
    json dev = json::object();
    for (std::size_t i = 0; i < obs.size(); ++i) {
      double worst = 0.0;
      for (const auto& r : res.records) {
        const double exact = expectation(traj[static_cast<std::size_t>(r.step)], obs[i]);
        worst = std::max(worst, std::abs(r.observables[i] - exact));
      }
      dev[obs[i].name] = worst;
    }
    s["rk4_max_abs_deviation"] = dev;
  }
  if (cfg.output.json) write_text(dir / "summary.json", s.dump(2) + "\n");
  out.summary = std::move(s);
  return out;
}

void run_oracle(const ExperimentConfig& cfg, const std::filesystem::path& dir) {
  const LindbladModel m = build_model(cfg.model);
  if (m.n_sites > kOracleMaxSites) {
    throw SizeGuardError("exact reference limited to " + std::to_string(kOracleMaxSites) + " sites");
  }
  std::filesystem::create_directories(dir);
  write_text(dir / "reference.csv", reference_csv(cfg, reference_values(cfg, m), model_hash(m)));
}

std::filesystem::path prepare_run_dir(const ExperimentConfig& cfg, const RunOptions& opts) {
  std::filesystem::path root = opts.out_root;
  if (root.empty()) root = cfg.output.directory;
  if (root.empty()) {
    const char* env = std::getenv("DQNN_OUT_ROOT");
    root = env && *env ? env : "runs";
  }
  const auto dir = root / (config_hash(cfg) + "-s" + std::to_string(cfg.solver.seed));
  if (std::filesystem::exists(dir)) {
    if (!opts.force) {
      throw std::runtime_error(dir.string() + " already exists; pass --force to overwrite");
    }
    std::filesystem::remove_all(dir);
  }
  std::filesystem::create_directories(dir);
  return dir;
}

int run_experiment(const ExperimentConfig& cfg, const RunOptions& opts) {
  const auto dir = prepare_run_dir(cfg, opts);
  if (!cfg.sweep) {
    const auto r = run_point(cfg, dir, opts.quiet);
    if (!opts.quiet) std::cerr << "wrote " << dir.string() << "\n";
    return r.converged ? kExitOk : kExitNotConverged;
  }

  // Each point re-validates its own document so it carries a complete echo.
  const auto& sw = *cfg.sweep;
  std::vector<ExperimentConfig> points;
  for (const auto& v : sw.values) {
    json doc = cfg.effective;
    doc.erase("sweep");
    set_path(doc, sw.parameter, v);
    points.push_back(config_from_json(doc));
  }
  std::vector<PointOutcome> outcomes(points.size());
  std::vector<std::string> failures(points.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < points.size(); i = next++) {
      char name[32];
      std::snprintf(name, sizeof(name), "point_%03zu", i);
      try {
        outcomes[i] = run_point(points[i], dir / name, opts.quiet);
      } catch (const std::exception& e) {
        failures[i] = e.what();
      }
    }
  };
  const int jobs = std::max(1, std::min<int>(opts.jobs, static_cast<int>(points.size())));
  std::vector<std::thread> pool;
  for (int j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  json summary;
  summary["config"] = cfg.effective;
  summary["git_describe"] = build_version();
  summary["seed"] = cfg.solver.seed;
  summary["parameter"] = sw.parameter;
  json rows = json::array();
  bool all_ok = true;
  for (std::size_t i = 0; i < points.size(); ++i) {
    json row;
    row["value"] = sw.values[i];
    row["directory"] = outcomes[i].directory.filename().string();
    if (!failures[i].empty()) {
      row["error"] = failures[i];
      row["converged"] = false;
      all_ok = false;
    } else {
      const auto& s = outcomes[i].summary;
      row["converged"] = outcomes[i].converged;
      for (const char* k : {"final", "reference", "relative_error", "deltaL_abs"}) {
        if (s.contains(k)) row[k] = s[k];
      }
      all_ok = all_ok && outcomes[i].converged;
    }
    rows.push_back(row);
  }
  summary["points"] = rows;
  summary["all_converged"] = all_ok;
  write_text(dir / "sweep_summary.json", summary.dump(2) + "\n");
  if (!opts.quiet) std::cerr << "wrote " << dir.string() << "\n";
  return all_ok ? kExitOk : kExitNotConverged;
}

}  // namespace dqnn
