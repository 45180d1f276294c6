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

#include "dqnn/lindblad.hpp"

#include "dqnn/errors.hpp"
#include "dqnn/random.hpp"

#include <algorithm>
#include <charconv>
#include <set>

namespace dqnn {

namespace {

std::string num(double x) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

void add_zz(LindbladModel& m, int a, int b, double coupling) {
  m.ham_terms.push_back({PauliString::pair(m.n_sites, a, Pauli::Z, b, Pauli::Z), coupling});
}

void add_field_and_jumps(LindbladModel& m, double h, double gamma) {
  for (int j = 0; j < m.n_sites; ++j) {
    m.ham_terms.push_back({PauliString::single(m.n_sites, j, Pauli::X), h});
  }
  for (int j = 0; j < m.n_sites; ++j) m.jumps.push_back({j, JumpKind::Lowering, gamma});
}

// Inserts (a, b) as an undirected bond; returns false for self-loops and repeats.
bool insert_bond(std::set<std::pair<int, int>>& bonds, int a, int b) {
  if (a == b) return false;
  return bonds.insert({std::min(a, b), std::max(a, b)}).second;
}

}  // namespace

void LindbladModel::validate() const {
  if (n_sites < 1) throw DimensionError("model has no sites");
  for (const auto& t : ham_terms) {
    if (t.op.n_qubits() != n_sites) {
      throw DimensionError("Hamiltonian term " + t.op.to_string() + " does not span " +
                           std::to_string(n_sites) + " sites");
    }
  }
  for (const auto& j : jumps) {
    if (j.site < 0 || j.site >= n_sites) throw DimensionError("jump site out of range");
    if (!(j.rate >= 0.0)) throw std::invalid_argument("jump rates must be non-negative");
  }
}

ComplexMatrix LindbladModel::hamiltonian() const {
  const auto d = dim_for_qubits(n_sites);
  ComplexMatrix h = ComplexMatrix::Zero(d, d);
  for (const auto& t : ham_terms) h += t.coeff * pauli_matrix(t.op);
  return h;
}

LindbladModel build_ising1d(int n, double j, double h, double gamma, bool periodic) {
  if (n < 2) throw std::invalid_argument("ising1d needs at least 2 sites, got " + std::to_string(n));
  LindbladModel m;
  m.kind = "ising1d";
  m.n_sites = n;
  m.periodic = periodic;
  std::set<std::pair<int, int>> bonds;
  const int last = periodic ? n : n - 1;
  for (int a = 0; a < last; ++a) {
    if (insert_bond(bonds, a, (a + 1) % n)) {
      add_zz(m, a, (a + 1) % n, j);
    } else {
      ++m.merged_duplicate_bonds;
    }
  }
  m.nn_bonds.assign(bonds.begin(), bonds.end());
  add_field_and_jumps(m, h, gamma);
  m.validate();
  return m;
}

LindbladModel build_j1j2_2d(int lx, int ly, double j1, double j2, double h, double gamma,
                            bool periodic) {
  if (lx < 2 || ly < 2) {
    throw std::invalid_argument("j1j2_2d needs extents >= 2, got " + std::to_string(lx) + "x" +
                                std::to_string(ly));
  }
  LindbladModel m;
  m.kind = "j1j2_2d";
  m.n_sites = lx * ly;
  m.periodic = periodic;
  auto site = [&](int x, int y) -> int {
    if (periodic) {
      x = (x % lx + lx) % lx;
      y = (y % ly + ly) % ly;
    } else if (x < 0 || x >= lx || y < 0 || y >= ly) {
      return -1;
    }
    return x + lx * y;
  };

  std::set<std::pair<int, int>> nn;
  std::vector<std::pair<int, int>> nn_order;
  std::set<std::pair<int, int>> diag;
  std::vector<std::pair<int, int>> diag_order;
  for (int y = 0; y < ly; ++y) {
    for (int x = 0; x < lx; ++x) {
      const int s = site(x, y);
      for (auto [dx, dy] : {std::pair{1, 0}, std::pair{0, 1}}) {
        const int t = site(x + dx, y + dy);
        if (t < 0) continue;
        if (insert_bond(nn, s, t)) {
          nn_order.push_back({std::min(s, t), std::max(s, t)});
        } else {
          ++m.merged_duplicate_bonds;
        }
      }
      for (auto [dx, dy] : {std::pair{1, 1}, std::pair{1, -1}}) {
        const int t = site(x + dx, y + dy);
        if (t < 0) continue;
        if (insert_bond(diag, s, t)) {
          diag_order.push_back({std::min(s, t), std::max(s, t)});
        } else {
          ++m.merged_duplicate_bonds;
        }
      }
    }
  }
  for (auto [a, b] : nn_order) add_zz(m, a, b, j1);
  if (j2 != 0.0) {
    for (auto [a, b] : diag_order) add_zz(m, a, b, j2);
  }
  m.nn_bonds.assign(nn.begin(), nn.end());
  add_field_and_jumps(m, h, gamma);
  m.validate();
  return m;
}

LindbladModel build_single_site(double h, double gamma) {
  LindbladModel m;
  m.kind = "single_site";
  m.n_sites = 1;
  if (h != 0.0) m.ham_terms.push_back({PauliString::single(1, 0, Pauli::X), h});
  m.jumps.push_back({0, JumpKind::Lowering, gamma});
  m.validate();
  return m;
}

std::string canonical_string(const LindbladModel& m) {
  std::string s = m.kind + ";n=" + std::to_string(m.n_sites) + ";periodic=" +
                  (m.periodic ? "1" : "0") + ";H=";
  for (const auto& t : m.ham_terms) s += num(t.coeff) + "*" + t.op.to_string() + ",";
  s += ";jumps=";
  for (const auto& j : m.jumps) s += "lower@" + std::to_string(j.site) + ":" + num(j.rate) + ",";
  return s;
}

std::uint64_t model_hash(const LindbladModel& m) { return fnv1a(canonical_string(m)); }

ComplexMatrix apply_liouvillian(const LindbladModel& m, const ComplexMatrix& rho) {
  const auto d = dim_for_qubits(m.n_sites);
  if (rho.rows() != d || rho.cols() != d) {
    throw DimensionError("rho has dimension " + std::to_string(rho.rows()) + ", model needs " +
                         std::to_string(d));
  }
  ComplexMatrix comm = ComplexMatrix::Zero(d, d);
  for (const auto& t : m.ham_terms) {
    comm += t.coeff * (pauli_left_multiply(t.op, rho) - pauli_right_multiply(rho, t.op));
  }
  ComplexMatrix out = Complex(0.0, -1.0) * comm;
  for (const auto& jmp : m.jumps) {
    const auto bit = static_cast<Eigen::Index>(site_mask(m.n_sites, jmp.site));
    for (Eigen::Index r = 0; r < d; ++r) {
      const bool r_up = (r & bit) == 0;
      for (Eigen::Index l = 0; l < d; ++l) {
        const bool l_up = (l & bit) == 0;
        Complex v = -0.5 * jmp.rate * (static_cast<double>(l_up) + static_cast<double>(r_up)) * rho(l, r);
        if (!l_up && !r_up) v += jmp.rate * rho(l ^ bit, r ^ bit);
        out(l, r) += v;
      }
    }
  }
  return out;
}

Complex local_element(const LocalOp& op, const SpinConfig& l, const SpinConfig& r) {
  const int n = l.size();
  if (r.size() != n) throw DimensionError("configurations differ in size");
  if (op.site < 0 || op.site >= n) throw std::out_of_range("operator site out of range");
  const std::uint64_t bit = site_mask(n, op.site);
  const bool others_equal = ((l.index() ^ r.index()) & ~bit) == 0;
  const int lj = l[op.site];
  const int rj = r[op.site];
  switch (op.kind) {
    case LocalOpKind::X:
      return (others_equal && lj == -rj) ? 1.0 : 0.0;
    case LocalOpKind::ZZ:
      if (op.site2 < 0 || op.site2 >= n) throw std::out_of_range("operator site out of range");
      return l == r ? static_cast<double>(rj * r[op.site2]) : 0.0;
    case LocalOpKind::RaiseLower:
      return (l == r && rj == 1) ? 1.0 : 0.0;
    case LocalOpKind::Lower:
      return (others_equal && rj == 1 && lj == -1) ? 1.0 : 0.0;
    case LocalOpKind::Raise:
      return (others_equal && rj == -1 && lj == 1) ? 1.0 : 0.0;
  }
  return 0.0;
}

Complex local_estimator(const LindbladModel& m, const ElementAccessor& rho_elem,
                        const SpinConfig& l, const SpinConfig& r) {
  if (l.size() != m.n_sites || r.size() != m.n_sites) {
    throw DimensionError("configurations do not span the model");
  }
  const Complex denom = rho_elem(l.index(), r.index());
  if (denom == 0.0) throw ZeroWeightError("rho(l, r) vanishes");
  return liouvillian_element(m, rho_elem, l.index(), r.index()) / denom;
}

Complex local_estimator(const LindbladModel& m, const ComplexMatrix& rho, std::uint64_t l,
                        std::uint64_t r) {
  auto elem = [&rho](std::uint64_t a, std::uint64_t b) {
    return rho(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
  };
  const Complex denom = elem(l, r);
  if (denom == 0.0) throw ZeroWeightError("rho(l, r) vanishes");
  return liouvillian_element(m, elem, l, r) / denom;
}

}  // namespace dqnn
