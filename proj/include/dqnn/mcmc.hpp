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
 * @file mcmc.hpp
 * Metropolis sampling of density-matrix elements.
 *
 * The pair chain walks over (l, r) with weight |rho_{l,r}|^2 and estimates S
 * and f from the ratios d rho_{l,r} / rho_{l,r} and (L rho)_{l,r} / rho_{l,r}.
 * The diagonal chain walks over l with weight rho_{l,l} and estimates
 * observables.
 */
#pragma once

#include "dqnn/lindblad.hpp"
#include "dqnn/network.hpp"
#include "dqnn/qcore.hpp"
#include "dqnn/random.hpp"
#include "dqnn/sr_system.hpp"

#include <array>
#include <utility>
#include <vector>

namespace dqnn {

/// Relative proposal weights, normalized internally. Moves without a valid
/// target on a given lattice (e.g. neighbor flips with no bonds) are skipped.
struct MoveSet {
  /// M1 flip a site in both l and r, M2 flip a site in l or r, M3 flip a
  /// bond in l or r, M4 flip all sites of both, M5 fresh uniform pair.
  std::array<double, 5> pair{30, 30, 30, 1, 1};
  /// D1 flip a site, D2 flip a bond, D3 flip all, D4 fresh uniform config.
  std::array<double, 4> diag{30, 30, 1, 1};

  void validate() const;
};

/// Lattice information the proposals need.
struct ChainGeometry {
  int n_sites;
  std::vector<std::pair<int, int>> bonds;

  static ChainGeometry from_model(const LindbladModel& m);
  /// A chain over n sites with nearest neighbors j, j+1 (open).
  static ChainGeometry open_chain(int n);
};

struct PairChainState {
  SpinConfig l;
  SpinConfig r;
  Complex amp;  // rho_{l,r}
};

/// One Metropolis step; returns the state unchanged on rejection.
PairChainState pair_chain_step(const PairChainState& st, const ElementAccessor& rho_elem,
                               const ChainGeometry& geo, const MoveSet& moves, Rng& rng,
                               bool* accepted = nullptr);

SpinConfig diag_chain_step(const SpinConfig& st, const ElementAccessor& rho_elem,
                           const ChainGeometry& geo, const MoveSet& moves, Rng& rng,
                           bool* accepted = nullptr);

struct Estimate {
  double mean;
  double std_error;
};

struct ObservableSampling {
  long n_samples = 10000;
  /// Burn-in in sweeps of n_sites steps; negative means 10 * n_sites.
  int burn_in_sweeps = -1;
  int n_batches = 16;
  MoveSet moves;
};

/**
 * Tr(rho A) along a diagonal chain, sample estimator sum_m A_{l,m} rho_{m,l} / rho_{l,l}.
 * Every term of A must act on at most two sites.
 */
Estimate estimate_observable(const ElementAccessor& rho_elem, const Observable& obs,
                             const ChainGeometry& geo, const ObservableSampling& opts, Rng& rng);

struct McmcOptions {
  long n_samples = 50000;
  int burn_in_sweeps = -1;
  /// Batches for the standard errors; 0 disables them.
  int n_batches = 0;
  MoveSet moves;
};

/// S and f from a pair chain over dense rho and derivative matrices.
SrSystem estimate_sr(const LindbladModel& m, const ComplexMatrix& rho,
                     const std::vector<ComplexMatrix>& derivs, const McmcOptions& opts, Rng& rng);

/// Convenience: evaluates the network densely, then samples.
SrSystem estimate_sr(const LindbladModel& m, const NetworkTopology& topo,
                     const ParamVector& params, const McmcOptions& opts, Rng& rng);

}  // namespace dqnn
