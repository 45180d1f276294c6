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
 * @file sr_solver.hpp
 * Stochastic reconfiguration on the vectorized density matrix.
 *
 * With rho normalized to unit Hilbert-Schmidt norm,
 *
 *     S_{mu nu} = Re<d_mu rho, d_nu rho> - Re(<d_mu rho, rho><rho, d_nu rho>)
 *     f_mu      = Re<d_mu rho, L rho>    - Re(<d_mu rho, rho><rho, L rho>)
 *
 * and each iteration moves Theta by lambda (S + eps I)^{-1} f.
 */
#pragma once

#include "dqnn/lindblad.hpp"
#include "dqnn/mcmc.hpp"
#include "dqnn/network.hpp"
#include "dqnn/qcore.hpp"
#include "dqnn/random.hpp"
#include "dqnn/shotsim.hpp"
#include "dqnn/sr_system.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace dqnn {

enum class Mode { SteadyState, Dynamics };
enum class Backend { Exact, Mcmc, Shots };
/// Where Gaussian noise of strength noise_eps enters.
enum class NoiseTarget { Derivatives, SrEntries };

struct SolverConfig {
  Mode mode = Mode::SteadyState;
  double lr0 = 0.01;
  double lr_decay = 0.999;
  double dt = 5e-3;
  int max_steps = 2000;
  double tikhonov_eps = 1e-4;
  double noise_eps = 0.0;
  NoiseTarget noise_target = NoiseTarget::Derivatives;
  std::uint64_t seed = 0;
  Backend backend = Backend::Exact;
  McmcOptions mcmc;
  ShotConfig shots;
  /// A SteadyState run counts as converged when the final |deltaL| is below this.
  double convergence_tol = 1e-2;
  /// Stop as soon as the tolerance is met instead of running max_steps.
  bool stop_at_tol = true;
  /// Theta starts uniform in [-init_scale, init_scale].
  double init_scale = 0.01;

  /// Throws std::invalid_argument listing the first violated constraint.
  void validate() const;
};

struct TrajectoryRecord {
  int step;
  double time;  // NaN in SteadyState mode
  std::vector<double> observables;
  double deltaL_re;
  double deltaL_im;
  double sr_residual;
  bool pinv_fallback;
};

struct UpdateResult {
  RealVector delta;
  double residual;     // |S delta / lr - f|
  bool pinv_fallback;  // regularized solve was singular
};

/// Dense S and f from rho, its derivatives and L rho (any normalization).
SrSystem assemble_dense(const ComplexMatrix& rho, const std::vector<ComplexMatrix>& derivs,
                        const ComplexMatrix& l_rho);

SrSystem assemble_exact(const LindbladModel& m, const NetworkTopology& topo,
                        const ParamVector& params);

/// Adds N(0, eps^2) to the real and imaginary parts of every entry.
void inject_noise(std::vector<ComplexMatrix>& derivs, double eps, Rng& rng);
/// Adds N(0, eps^2) to every f entry and every S entry (kept symmetric).
void inject_noise(SrSystem& sys, double eps, Rng& rng);

UpdateResult solve_update(const SrSystem& sys, double lr, double eps);

/// <rho, L rho> / <rho, rho>
Complex delta_L(const LindbladModel& m, const DensityMatrix& rho);
Complex delta_L(const LindbladModel& m, const ComplexMatrix& rho);

/// Theta drawn uniform in [-scale, scale] from the "init" stream of seed.
ParamVector initial_params(const NetworkTopology& topo, std::uint64_t seed, double scale);

struct RunResult {
  std::vector<TrajectoryRecord> records;
  ParamVector params;     // final parameters
  ComplexMatrix rho;      // final network state
  bool converged = false;
  bool aborted = false;
  std::string diagnostic;
};

/// Called after every record; returning false stops the run early.
using RecordCallback = std::function<bool(const TrajectoryRecord&)>;

RunResult run(const SolverConfig& cfg, const LindbladModel& m, const NetworkTopology& topo,
              const std::vector<Observable>& observables, const RecordCallback& on_record = {});

}  // namespace dqnn
