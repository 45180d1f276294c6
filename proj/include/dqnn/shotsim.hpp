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
 * @file shotsim.hpp
 * Ancilla interference circuits on two registers A, B holding states a, b.
 *
 * The ancilla starts in (|0> + e^{i phi}|1>)/sqrt(2), controls a unitary V on
 * A (x) B, and is measured in the X basis after a Hadamard:
 *
 *     P(0) = 1/2 + 1/2 Re(e^{i phi} Tr[V (a (x) b)]).
 *
 * With V = SWAP the trace is Tr[a b]; with V = O_A SWAP it is Tr[a O b]; with
 * V = (O1_A (x) O2_B) SWAP it is Tr[a O1 b O2]. phi = 0 reads the real part,
 * phi = pi/2 the imaginary part (P(0) = 1/2 - 1/2 Im).
 */
#pragma once

#include "dqnn/lindblad.hpp"
#include "dqnn/network.hpp"
#include "dqnn/qcore.hpp"
#include "dqnn/random.hpp"
#include "dqnn/sr_system.hpp"

namespace dqnn {

struct ShotConfig {
  /// Shots per circuit; 0 means exact probabilities.
  long shots = 0;
  /// Split the shots into this many independent batches to get standard
  /// errors (0 = one batch, no errors).
  int batches = 0;

  bool exact() const { return shots == 0; }
};

enum class Part { Re, Im };

/// Probability of ancilla outcome 0 given the register trace z = Tr[V (a (x) b)].
double ancilla_p0(Complex z, Part part);

/// Estimate of Tr[a b]: 2 P(0) - 1.
double overlap_test(const DensityMatrix& a, const DensityMatrix& b, const ShotConfig& cfg,
                    Rng& rng);

/// Estimate of Re or Im of Tr[a O b].
double ctrl_o_test(const DensityMatrix& a, const DensityMatrix& b, const PauliString& o,
                   Part part, const ShotConfig& cfg, Rng& rng);

/// Estimate of Re or Im of Tr[a O1 b O2].
double ctrl_o1_o2_test(const DensityMatrix& a, const DensityMatrix& b, const PauliString& o1,
                       const PauliString& o2, Part part, const ShotConfig& cfg, Rng& rng);

/**
 * S and f from circuit estimates on shifted network states. Matches the dense
 * assembly (same normalization) in exact mode.
 */
SrSystem assemble_shots(const LindbladModel& m, const NetworkTopology& topo,
                        const ParamVector& params, const ShotConfig& cfg, Rng& rng);

}  // namespace dqnn
