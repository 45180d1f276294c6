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

/**
 * @file experiment.hpp
 * Experiment configs and the artifacts written for each run.
 *
 * A config is a JSON document with the sections model, network, solver,
 * sweep (optional) and output. The grammar is documented in README.md.
 * Every run writes into its own directory
 *
 *     <root>/<config hash>-s<seed>/
 *         trajectory.csv   step,time,<observables...>,deltaL_re,deltaL_im,sr_residual
 *         reference.csv    observable,value,model_hash (exact steady state)
 *         summary.json
 *
 * and a sweep writes one such directory per point under point_NNN/ plus a
 * sweep_summary.json.
 */
#pragma once

#include "dqnn/lindblad.hpp"
#include "dqnn/network.hpp"
#include "dqnn/sr_solver.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace dqnn {

/// Exit statuses of the command line tool.
enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitValidation = 2, kExitNotConverged = 3 };

struct ModelSection {
  std::string kind = "ising1d";  // ising1d | j1j2_2d | single_site
  int n_sites = 0;               // ising1d; derived for the others
  int lx = 2;
  int ly = 2;
  double j = 1.0;
  double j1 = 1.0;
  double j2 = 0.5;
  double h = 1.0;
  double gamma = 1.0;
  bool periodic = true;
};

struct NetworkSection {
  std::vector<int> layer_sizes;
  Connectivity connectivity = Connectivity::LocalModulo;
  Tying tying = Tying::TiedPerLayer;
  FreshState fresh_state = FreshState::Plus;
};

struct SweepSection {
  std::string parameter;  // dotted key path, e.g. "model.h"
  std::vector<nlohmann::json> values;
};

struct OutputSection {
  std::string directory;  // empty: $DQNN_OUT_ROOT, then "runs"
  bool csv = true;
  bool json = true;
  std::vector<std::string> observables{"sx_mean", "sz_mean", "sxsx_01"};
};

struct ExperimentConfig {
  ModelSection model;
  NetworkSection network;
  SolverConfig solver;
  std::optional<SweepSection> sweep;
  OutputSection output;
  /// The validated document with every default filled in.
  nlohmann::json effective;
};

/// Carries every violation found, each prefixed with its key path.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

/**
 * Parses and validates a config. `overrides` is merged into the document
 * before validation (flat map of dotted key paths to values), which is how
 * command line flags take precedence.
 */
ExperimentConfig parse_config(const std::string& text,
                              const nlohmann::json& overrides = nlohmann::json::object());

/// Validates an already parsed document.
ExperimentConfig config_from_json(nlohmann::json doc);

/// Closest known key for an unknown one, or empty.
std::string suggest_key(const std::string& unknown, const std::vector<std::string>& known);

LindbladModel build_model(const ModelSection& m);
NetworkTopology build_topology(const NetworkSection& n);
/// Named observables on an n-site register: sx_mean, sy_mean, sz_mean,
/// sxsx_01, szsz_01.
Observable named_observable(const std::string& name, int n_sites);

/// Shortest decimal that reads back as the same double.
std::string format_double(double x);

/// Hash of the effective config, as 16 hex digits.
std::string config_hash(const ExperimentConfig& cfg);

std::string build_version();

struct RunOptions {
  std::filesystem::path out_root;  // empty: config, then $DQNN_OUT_ROOT, then "runs"
  bool force = false;
  bool quiet = false;
  int jobs = 1;
};

struct PointOutcome {
  std::filesystem::path directory;
  bool converged = false;
  bool aborted = false;
  nlohmann::json summary;
};

/// Exact steady-state values of the configured observables.
std::vector<double> reference_values(const ExperimentConfig& cfg, const LindbladModel& m);

/// Runs one solve and writes its artifacts into dir (created if needed).
PointOutcome run_point(const ExperimentConfig& cfg, const std::filesystem::path& dir, bool quiet);

/// Writes reference.csv only.
void run_oracle(const ExperimentConfig& cfg, const std::filesystem::path& dir);

/// Resolves the run directory and refuses to reuse one unless forced.
std::filesystem::path prepare_run_dir(const ExperimentConfig& cfg, const RunOptions& opts);

/// The whole experiment; returns an ExitCode.
int run_experiment(const ExperimentConfig& cfg, const RunOptions& opts);

}  // namespace dqnn
