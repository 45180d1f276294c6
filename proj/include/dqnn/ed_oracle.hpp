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
 * @file ed_oracle.hpp
 * Exact reference solutions from the dense Liouvillian.
 *
 * Vectorization is column-major: vec(|a><b|) = |b> (x) |a>, so
 * vec(A rho B) = (B^T (x) A) vec(rho).
 */
#pragma once

#include "dqnn/lindblad.hpp"
#include "dqnn/qcore.hpp"

#include <vector>

namespace dqnn {

inline constexpr int kOracleMaxSites = 6;

struct Superoperator {
  int n_sites;
  ComplexMatrix mat;  // 4^n x 4^n
};

ComplexVector vectorize(const ComplexMatrix& rho);
ComplexMatrix unvectorize(const ComplexVector& v);

/// Throws SizeGuardError above kOracleMaxSites.
Superoperator liouvillian_matrix(const LindbladModel& m);

/// Eigenvalues of a superoperator (unsorted).
ComplexVector superoperator_spectrum(const Superoperator& s);

struct SteadyStateOptions {
  /// Eigenvalues with |lambda| below this count toward the kernel dimension.
  double zero_tol = 1e-8;
};

struct SteadyStateResult {
  DensityMatrix rho;
  Complex eigenvalue;   // the one nearest zero
  int kernel_dim;       // eigenvalues within zero_tol
  bool degenerate;      // kernel_dim > 1; rho is then the first kernel vector
  double residual;      // max |L rho|
};

SteadyStateResult solve_steady_state(const LindbladModel& m, const SteadyStateOptions& opts = {});

/// Kernel state of L; a degenerate kernel is logged to stderr and the first
/// vector returned.
DensityMatrix steady_state(const LindbladModel& m);

/// Classic RK4 on d rho/dt = L rho. Returns steps+1 states starting at rho0.
std::vector<DensityMatrix> evolve_rk4(const LindbladModel& m, const DensityMatrix& rho0,
                                      double dt, int steps);

}  // namespace dqnn
