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
 * @file lindblad.hpp
 * Dissipative spin models and the Liouvillian
 *
 *     L rho = -i[H, rho] + sum_j gamma_j (s-_j rho s+_j - 1/2 {s+_j s-_j, rho}).
 */
#pragma once

#include "dqnn/qcore.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace dqnn {

struct HamiltonianTerm {
  PauliString op;  // coefficient 1
  double coeff;
};

enum class JumpKind { Lowering };

struct Jump {
  int site;
  JumpKind kind;
  double rate;
};

struct LindbladModel {
  std::string kind;  // "ising1d", "j1j2_2d", "single_site"
  int n_sites = 0;
  std::vector<HamiltonianTerm> ham_terms;
  std::vector<Jump> jumps;
  /// Nearest-neighbor bonds of the lattice graph (i < j). Used by samplers
  /// for "two neighboring sites" moves.
  std::vector<std::pair<int, int>> nn_bonds;
  bool periodic = false;
  /// Bonds dropped because wraparound produced them twice.
  int merged_duplicate_bonds = 0;

  /// Throws on inconsistent sizes or negative rates.
  void validate() const;
  ComplexMatrix hamiltonian() const;
};

/// H = J sum ZZ(j, j+1) + h sum X_j, sigma^- on every site with rate gamma.
LindbladModel build_ising1d(int n, double j, double h, double gamma, bool periodic);

/// Square lattice, site index x + lx * y. NN ZZ bonds with j1, diagonal ZZ
/// bonds with j2, transverse field h. Duplicate bonds are merged.
LindbladModel build_j1j2_2d(int lx, int ly, double j1, double j2, double h, double gamma,
                            bool periodic);

/// One spin: H = h X, decay with rate gamma.
LindbladModel build_single_site(double h, double gamma);

/// Canonical text form (round-trip numbers); equal strings mean equal models.
std::string canonical_string(const LindbladModel& m);
std::uint64_t model_hash(const LindbladModel& m);

ComplexMatrix apply_liouvillian(const LindbladModel& m, const ComplexMatrix& rho);

enum class LocalOpKind {
  X,             // sigma^x_j
  ZZ,            // sigma^z_j sigma^z_k
  RaiseLower,    // sigma^+_j sigma^-_j
  Lower,         // sigma^-_j
  Raise,         // sigma^+_j
};

struct LocalOp {
  LocalOpKind kind;
  int site;
  int site2 = -1;  // ZZ only
};

/// <l| op |r> for the local operators appearing in the models.
Complex local_element(const LocalOp& op, const SpinConfig& l, const SpinConfig& r);

/// Density-matrix element accessor rho(l, r) on basis indices.
using ElementAccessor = std::function<Complex(std::uint64_t, std::uint64_t)>;

/**
 * (L rho)_{l,r} / rho_{l,r} from O(n_sites) element queries.
 * Throws ZeroWeightError if rho_{l,r} vanishes.
 */
Complex local_estimator(const LindbladModel& m, const ElementAccessor& rho_elem,
                        const SpinConfig& l, const SpinConfig& r);

/// Same, reading elements from a dense matrix.
Complex local_estimator(const LindbladModel& m, const ComplexMatrix& rho, std::uint64_t l,
                        std::uint64_t r);

/// Unnormalized (L rho)_{l,r} from element queries.
template <class Elem>
Complex liouvillian_element(const LindbladModel& m, const Elem& rho, std::uint64_t l,
                            std::uint64_t r) {
  const int n = m.n_sites;
  Complex hl = 0.0;  // (H rho)_{l,r}
  Complex hr = 0.0;  // (rho H)_{l,r}
  for (const auto& t : m.ham_terms) {
    const std::uint64_t mask = t.op.flip_mask();
    // <l|P|k> with k = l ^ mask: amplitude of P|k> at l.
    const std::uint64_t k = l ^ mask;
    hl += t.coeff * t.op.apply_to_basis(k).second * rho(k, r);
    const auto [kr, amp] = t.op.apply_to_basis(r);
    hr += t.coeff * amp * rho(l, kr);
  }
  Complex out = Complex(0.0, -1.0) * (hl - hr);
  const Complex rlr = rho(l, r);
  for (const auto& jmp : m.jumps) {
    const std::uint64_t bit = site_mask(n, jmp.site);
    const bool l_up = (l & bit) == 0;
    const bool r_up = (r & bit) == 0;
    out -= 0.5 * jmp.rate * (static_cast<double>(l_up) + static_cast<double>(r_up)) * rlr;
    if (!l_up && !r_up) out += jmp.rate * rho(l ^ bit, r ^ bit);
  }
  return out;
}

}  // namespace dqnn
