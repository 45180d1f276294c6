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

// Command line front end: dqnn <steady|dynamics|oracle|sweep|validate> CONFIG [flags]

#include "dqnn/experiment.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string backend;
  std::string out;
  bool quiet = false;
  bool force = false;
  int jobs = 1;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int dispatch(const std::string& cmd, const Flags& f) {
  nlohmann::json overrides = nlohmann::json::object();
  if (f.seed) overrides["solver.seed"] = *f.seed;
  if (!f.backend.empty()) overrides["solver.backend"] = f.backend;
  if (cmd == "steady") overrides["solver.mode"] = "steady";
  if (cmd == "dynamics") overrides["solver.mode"] = "dynamics";

  std::string text;
  try {
    text = slurp(f.config);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return dqnn::kExitUsage;
  }

  dqnn::ExperimentConfig cfg;
  try {
    cfg = dqnn::parse_config(text, overrides);
  } catch (const dqnn::ConfigError& e) {
    std::cerr << f.config << ": " << e.what() << "\n";
    return dqnn::kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << f.config << ": invalid config: " << e.what() << "\n";
    return dqnn::kExitValidation;
  }
  if (cmd == "validate") {
    if (!f.quiet) std::cout << "ok\n";
    return dqnn::kExitOk;
  }
  if ((cmd == "steady" || cmd == "dynamics") && cfg.sweep) {
    std::cerr << "error: config has a sweep section; use the sweep subcommand\n";
    return dqnn::kExitUsage;
  }
  if (cmd == "sweep" && !cfg.sweep) {
    std::cerr << "error: config has no sweep section\n";
    return dqnn::kExitUsage;
  }

  dqnn::RunOptions opts;
  opts.out_root = f.out;
  opts.force = f.force;
  opts.quiet = f.quiet;
  opts.jobs = f.jobs;
  try {
    if (cmd == "oracle") {
      const auto dir = dqnn::prepare_run_dir(cfg, opts);
      dqnn::run_oracle(cfg, dir);
      if (!f.quiet) std::cerr << "wrote " << dir.string() << "\n";
      return dqnn::kExitOk;
    }
    return dqnn::run_experiment(cfg, opts);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return dqnn::kExitUsage;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Variational Lindblad solver on deep quantum feedforward networks"};
  app.require_subcommand(1);
  Flags flags;
  const std::vector<std::pair<std::string, std::string>> commands{
      {"steady", "Iterate to the steady state"},
      {"dynamics", "Follow the dissipative dynamics with a fixed time step"},
      {"oracle", "Write the exact steady-state reference only"},
      {"sweep", "Run every point of the sweep section"},
      {"validate", "Check a config and exit"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("config", flags.config, "Config file (JSON)")->required();
    sub->add_option("--seed", flags.seed, "Override solver.seed");
    sub->add_option("--backend", flags.backend, "Override solver.backend")
        ->check(CLI::IsMember({"exact", "mcmc", "shots"}));
    sub->add_option("--out", flags.out, "Output root (default: output.directory, $DQNN_OUT_ROOT, runs)");
    sub->add_flag("--quiet", flags.quiet, "No progress output");
    sub->add_flag("--force", flags.force, "Overwrite an existing run directory");
    sub->add_option("--jobs", flags.jobs, "Parallel sweep points")->check(CLI::PositiveNumber);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? dqnn::kExitOk : dqnn::kExitUsage;
  }
  for (const auto& [name, _] : commands) {
    if (app.got_subcommand(name)) return dispatch(name, flags);
  }
  return dqnn::kExitUsage;
}
