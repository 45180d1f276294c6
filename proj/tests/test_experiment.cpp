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

#include "dqnn/ed_oracle.hpp"
#include "dqnn/experiment.hpp"

#include <catch_amalgamated.hpp>

#include <charconv>
#include <fstream>
#include <random>
#include <sstream>

using namespace dqnn;
namespace fs = std::filesystem;

namespace {

const char* kMinimal = R"({
  "model": {"kind": "ising1d", "n_sites": 3, "h": 1.0},
  "network": {"layer_sizes": [2, 2, 3]},
  "solver": {"seed": 4}
})";

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> problems_of(const std::string& text) {
  try {
    (void)parse_config(text);
  } catch (const ConfigError& e) {
    return e.problems();
  }
  return {};
}

bool any_contains(const std::vector<std::string>& xs, const std::string& needle) {
  for (const auto& x : xs) {
    if (x.find(needle) != std::string::npos) return true;
  }
  return false;
}

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("dqnn_test_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("a minimal config gets the documented defaults") {
  const auto cfg = parse_config(kMinimal);
  CHECK(cfg.model.n_sites == 3);
  CHECK(cfg.model.j == 1.0);
  CHECK(cfg.model.gamma == 1.0);
  CHECK(cfg.model.periodic);
  CHECK(cfg.network.connectivity == Connectivity::LocalModulo);
  CHECK(cfg.network.tying == Tying::TiedPerLayer);
  CHECK(cfg.solver.mode == Mode::SteadyState);
  CHECK(cfg.solver.lr0 == 0.01);
  CHECK(cfg.solver.lr_decay == 0.999);
  CHECK(cfg.solver.dt == 5e-3);
  CHECK(cfg.solver.tikhonov_eps == 1e-4);
  CHECK(cfg.solver.seed == 4);
  CHECK(cfg.solver.backend == Backend::Exact);
  CHECK(cfg.solver.mcmc.n_samples == 50000);
  CHECK_FALSE(cfg.sweep.has_value());

  // every default is materialized in the echoed config
  for (const auto* key : {"lr0", "lr_decay", "dt", "max_steps", "tikhonov_eps", "noise_eps", "backend",
                          "mcmc_samples", "shots", "convergence_tol", "init_scale"}) {
    CHECK(cfg.effective["solver"].contains(key));
  }
  CHECK(cfg.effective["network"]["tying"] == "tied_per_layer");
  CHECK(cfg.effective["output"]["observables"].size() == 3);
}

TEST_CASE("output layer size must match the model") {
  const auto p = problems_of(R"({
    "model": {"kind": "ising1d", "n_sites": 5},
    "network": {"layer_sizes": [2, 2, 4]},
    "solver": {"seed": 1}})");
  REQUIRE(p.size() == 1);
  CHECK(p[0].find("network.layer_sizes") != std::string::npos);
  CHECK(p[0].find("model.n_sites") != std::string::npos);
}

TEST_CASE("unknown keys get suggestions and every problem is listed") {
  const auto p = problems_of(R"({
    "model": {"kind": "ising1d", "n_sites": 3, "gama": 1.0},
    "network": {"layer_sizes": [2, 2, 3], "tying": "sometimes"},
    "solver": {"learning_rate_sched": 0.999, "lr0": -1, "h": 2},
    "outptu": {}})");
  CHECK(any_contains(p, "\"lr_decay\""));
  CHECK(any_contains(p, "\"gamma\""));
  CHECK(any_contains(p, "network.tying"));
  CHECK(any_contains(p, "solver.lr0"));
  CHECK(any_contains(p, "solver.seed: required"));
  CHECK(any_contains(p, "solver.h"));
  CHECK(any_contains(p, "\"output\""));
  CHECK(p.size() == 7);
}

TEST_CASE("syntax errors and wrong types are reported") {
  CHECK_THROWS(parse_config("{ \"model\": "));
  CHECK(any_contains(problems_of(R"({"model": {"kind": "ising1d", "n_sites": "three"},
                                     "network": {"layer_sizes": [2, 3]}, "solver": {"seed": 0}})"),
                     "model.n_sites"));
  CHECK(any_contains(problems_of(R"({"model": {"kind": "ising1d", "n_sites": 3},
                                     "network": {"layer_sizes": [1, 3]}, "solver": {"seed": 0}})"),
                     "network.layer_sizes"));
  CHECK(any_contains(problems_of(R"({"model": {"kind": "ising1d", "n_sites": 3},
                                     "network": {"layer_sizes": [2, 3]}, "solver": {"seed": -3}})"),
                     "solver.seed"));
}

TEST_CASE("comments are allowed and overrides win") {
  const std::string text = std::string("// header comment\n") + kMinimal;
  const auto cfg = parse_config(text, {{"solver.seed", 9}, {"solver.backend", "mcmc"}});
  CHECK(cfg.solver.seed == 9);
  CHECK(cfg.solver.backend == Backend::Mcmc);
  CHECK(cfg.effective["solver"]["backend"] == "mcmc");
}

TEST_CASE("sweep points are validated one by one") {
  const auto ok = parse_config(R"({
    "model": {"kind": "ising1d", "n_sites": 3},
    "network": {"layer_sizes": [2, 3]},
    "solver": {"seed": 0},
    "sweep": {"parameter": "model.h", "values": [0.2, 0.6]}})");
  REQUIRE(ok.sweep.has_value());
  CHECK(ok.sweep->values.size() == 2);
  const auto p = problems_of(R"({
    "model": {"kind": "ising1d", "n_sites": 3},
    "network": {"layer_sizes": [2, 3]},
    "solver": {"seed": 0},
    "sweep": {"parameter": "model.gamma", "values": [1.0, -1.0]}})");
  CHECK(any_contains(p, "model.gamma"));
}

TEST_CASE("2x2 lattice configs derive the site count") {
  const auto cfg = parse_config(R"({
    "model": {"kind": "j1j2_2d", "lx": 2, "ly": 2},
    "network": {"layer_sizes": [4, 4, 4]},
    "solver": {"seed": 0}})");
  CHECK(cfg.model.n_sites == 4);
  const auto m = build_model(cfg.model);
  CHECK(m.n_sites == 4);
  CHECK(m.merged_duplicate_bonds > 0);
}

TEST_CASE("format_double is the shortest round trip") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(-2.0) == "-2");
  CHECK(format_double(1e-20) == "1e-20");
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  for (int i = 0; i < 1000; ++i) {
    const double x = u(rng) * std::pow(10.0, (i % 40) - 20);
    const std::string s = format_double(x);
    double back = 0.0;
    std::from_chars(s.data(), s.data() + s.size(), back);
    REQUIRE(back == x);
  }
}

TEST_CASE("config hash ignores the output directory only") {
  auto a = parse_config(kMinimal);
  auto b = parse_config(kMinimal, {{"output.directory", "/elsewhere"}});
  auto c = parse_config(kMinimal, {{"model.h", 0.5}});
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a) != config_hash(c));
  CHECK(config_hash(a).size() == 16);
}

TEST_CASE("named observables") {
  const auto sx = named_observable("sx_mean", 4);
  CHECK(sx.terms.size() == 4);
  const auto ss = steady_state(build_ising1d(3, 1.0, 0.6, 1.0, true));
  const double manual = (expectation(ss, PauliString::parse("XII")) + expectation(ss, PauliString::parse("IXI")) +
                         expectation(ss, PauliString::parse("IIX"))) / 3.0;
  CHECK(std::abs(expectation(ss, sx.terms.size() == 4 ? named_observable("sx_mean", 3) : sx) - manual) < 1e-14);
  CHECK(std::abs(expectation(ss, named_observable("sxsx_01", 3)) - expectation(ss, PauliString::parse("XXI"))) < 1e-14);
  CHECK_THROWS(named_observable("magic", 3));
}

TEST_CASE("a run writes deterministic artifacts and refuses to overwrite") {
  const fs::path root = scratch_dir("run");
  auto cfg = parse_config(kMinimal, {{"solver.max_steps", 6}, {"solver.stop_at_tol", false}});
  RunOptions opts;
  opts.out_root = root;
  opts.quiet = true;
  const int rc = run_experiment(cfg, opts);
  CHECK((rc == kExitOk || rc == kExitNotConverged));
  const fs::path dir = root / (config_hash(cfg) + "-s4");
  REQUIRE(fs::exists(dir / "trajectory.csv"));
  REQUIRE(fs::exists(dir / "reference.csv"));
  REQUIRE(fs::exists(dir / "summary.json"));

  const std::string traj = slurp(dir / "trajectory.csv");
  CHECK(traj.rfind("step,time,sx_mean,sz_mean,sxsx_01,deltaL_re,deltaL_im,sr_residual\n", 0) == 0);
  CHECK(std::count(traj.begin(), traj.end(), '\n') == 8);
  CHECK(traj.find("nan") == std::string::npos);

  const auto summary = nlohmann::json::parse(slurp(dir / "summary.json"));
  CHECK(summary["seed"] == 4);
  CHECK(summary["config"] == cfg.effective);
  CHECK(summary.contains("git_describe"));
  CHECK(summary.contains("relative_error"));
  CHECK(summary["steps_run"] == 6);

  CHECK_THROWS(run_experiment(cfg, opts));
  opts.force = true;
  CHECK(run_experiment(cfg, opts) == rc);
  CHECK(slurp(dir / "trajectory.csv") == traj);

  cfg = parse_config(kMinimal, {{"solver.max_steps", 6}, {"solver.stop_at_tol", false}, {"solver.seed", 5}});
  opts.force = false;
  run_experiment(cfg, opts);
  CHECK(slurp(root / (config_hash(cfg) + "-s5") / "trajectory.csv") != traj);
  fs::remove_all(root);
}

TEST_CASE("dynamics runs record time and the rk4 deviation") {
  const fs::path root = scratch_dir("dyn");
  const auto cfg = parse_config(kMinimal, {{"solver.mode", "dynamics"}, {"solver.max_steps", 4}});
  RunOptions opts;
  opts.out_root = root;
  opts.quiet = true;
  CHECK(run_experiment(cfg, opts) == kExitOk);
  const fs::path dir = root / (config_hash(cfg) + "-s4");
  const std::string traj = slurp(dir / "trajectory.csv");
  CHECK(traj.find("\n2,0.01,") != std::string::npos);
  const auto summary = nlohmann::json::parse(slurp(dir / "summary.json"));
  CHECK(summary.contains("rk4_max_abs_deviation"));
  fs::remove_all(root);
}

TEST_CASE("a sweep writes one directory per point") {
  const fs::path root = scratch_dir("sweep");
  const auto cfg = parse_config(R"({
    "model": {"kind": "ising1d", "n_sites": 3},
    "network": {"layer_sizes": [2, 3]},
    "solver": {"seed": 0, "max_steps": 3},
    "sweep": {"parameter": "model.h", "values": [0.2, 0.6, 1.0]}})");
  RunOptions opts;
  opts.out_root = root;
  opts.quiet = true;
  opts.jobs = 2;
  run_experiment(cfg, opts);
  const fs::path dir = root / (config_hash(cfg) + "-s0");
  for (const auto* p : {"point_000", "point_001", "point_002"}) CHECK(fs::exists(dir / p / "trajectory.csv"));
  const auto summary = nlohmann::json::parse(slurp(dir / "sweep_summary.json"));
  CHECK(summary["points"].size() == 3);
  fs::remove_all(root);
}
