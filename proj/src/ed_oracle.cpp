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

#include "dqnn/errors.hpp"

#include <complex>
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include <iostream>

namespace dqnn {

namespace {

void guard(int n_sites) {
  if (n_sites > kOracleMaxSites) {
    throw SizeGuardError("exact oracle limited to " + std::to_string(kOracleMaxSites) +
                         " sites, model has " + std::to_string(n_sites));
  }
}

// sigma^- on `site`, built from Pauli matrices: (X - iY) / 2.
ComplexMatrix lowering_matrix(int n, int site) {
  return 0.5 * (pauli_matrix(PauliString::single(n, site, Pauli::X)) -
                kI * pauli_matrix(PauliString::single(n, site, Pauli::Y)));
}

struct Eig {
  ComplexVector values;
  ComplexMatrix vectors;
};

Eig eig(ComplexMatrix a, bool want_vectors) {
  const auto n = static_cast<lapack_int>(a.rows());
  Eig out;
  out.values.resize(n);
  if (want_vectors) out.vectors.resize(n, n);
  Complex dummy;
  const lapack_int info = LAPACKE_zgeev(
      LAPACK_COL_MAJOR, 'N', want_vectors ? 'V' : 'N', n, a.data(), n, out.values.data(),
      &dummy, 1, want_vectors ? out.vectors.data() : &dummy, want_vectors ? n : 1);
  if (info != 0) throw std::runtime_error("zgeev failed with info " + std::to_string(info));
  return out;
}

}  // namespace

ComplexVector vectorize(const ComplexMatrix& rho) {
  return Eigen::Map<const ComplexVector>(rho.data(), rho.size());
}

ComplexMatrix unvectorize(const ComplexVector& v) {
  Eigen::Index d = 1;
  while (d * d < v.size()) ++d;
  if (d * d != v.size()) throw DimensionError("vector length is not a square");
  return Eigen::Map<const ComplexMatrix>(v.data(), d, d);
}

Superoperator liouvillian_matrix(const LindbladModel& m) {
  guard(m.n_sites);
  const auto d = dim_for_qubits(m.n_sites);
  const ComplexMatrix id = ComplexMatrix::Identity(d, d);
  const ComplexMatrix h = m.hamiltonian();
  ComplexMatrix l = -kI * (tensor_product(id, h) - tensor_product(h.transpose(), id));
  for (const auto& j : m.jumps) {
    const ComplexMatrix f = lowering_matrix(m.n_sites, j.site);
    const ComplexMatrix ff = f.adjoint() * f;
    l += j.rate * (tensor_product(f.conjugate(), f) - 0.5 * tensor_product(id, ff) -
                   0.5 * tensor_product(ff.transpose(), id));
  }
  return {m.n_sites, std::move(l)};
}

ComplexVector superoperator_spectrum(const Superoperator& s) { return eig(s.mat, false).values; }

SteadyStateResult solve_steady_state(const LindbladModel& m, const SteadyStateOptions& opts) {
  const Superoperator s = liouvillian_matrix(m);
  const Eig e = eig(s.mat, true);
  Eigen::Index best = 0;
  int kernel = 0;
  for (Eigen::Index i = 0; i < e.values.size(); ++i) {
    if (std::abs(e.values(i)) < std::abs(e.values(best))) best = i;
    if (std::abs(e.values(i)) <= opts.zero_tol) ++kernel;
  }
  ComplexMatrix rho = hermitian_part(unvectorize(e.vectors.col(best)));
  const Complex tr = rho.trace();
  if (std::abs(tr) == 0.0) throw ZeroWeightError("steady-state vector has zero trace");
  rho /= tr;
  rho = hermitian_part(rho);
  const double residual = apply_liouvillian(m, rho).cwiseAbs().maxCoeff();
  return {DensityMatrix(std::move(rho)), e.values(best), kernel, kernel > 1, residual};
}

DensityMatrix steady_state(const LindbladModel& m) {
  auto res = solve_steady_state(m);
  if (res.degenerate) {
    std::cerr << "warning: steady-state manifold has dimension " << res.kernel_dim
              << "; returning the first kernel vector\n";
  }
  return std::move(res.rho);
}

std::vector<DensityMatrix> evolve_rk4(const LindbladModel& m, const DensityMatrix& rho0,
                                      double dt, int steps) {
  guard(m.n_sites);
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (steps < 0) throw std::invalid_argument("steps must be non-negative");
  if (rho0.n_qubits() != m.n_sites) throw DimensionError("initial state does not match model");
  std::vector<DensityMatrix> out;
  out.reserve(static_cast<std::size_t>(steps) + 1);
  out.push_back(rho0);
  ComplexMatrix rho = rho0.mat();
  for (int s = 0; s < steps; ++s) {
    const ComplexMatrix k1 = apply_liouvillian(m, rho);
    const ComplexMatrix k2 = apply_liouvillian(m, rho + 0.5 * dt * k1);
    const ComplexMatrix k3 = apply_liouvillian(m, rho + 0.5 * dt * k2);
    const ComplexMatrix k4 = apply_liouvillian(m, rho + dt * k3);
    rho = hermitian_part(rho + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
    out.emplace_back(rho);
  }
  return out;
}

}  // namespace dqnn
