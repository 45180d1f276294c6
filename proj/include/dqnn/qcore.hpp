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
 * @file qcore.hpp
 * Dense operator primitives shared by every other module.
 *
 * Conventions (fixed project-wide):
 *  - qubit 0 owns the most significant bit of a basis index;
 *  - spin +1 <-> bit 0 <-> sigma^z eigenvalue +1;
 *  - sigma^- = |1><0| lowers spin +1 to spin -1.
 */
#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace dqnn {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

inline constexpr Complex kI{0.0, 1.0};

/// 2^n as a matrix dimension.
Eigen::Index dim_for_qubits(int n_qubits);

/// Inverse of dim_for_qubits; throws DimensionError unless dim is a power of 2.
int qubits_for_dim(Eigen::Index dim);

/// (m + m^dagger) / 2
ComplexMatrix hermitian_part(const ComplexMatrix& m);

/// Largest entry of |m - m^dagger|.
double hermiticity_error(const ComplexMatrix& m);

/// Density matrix on n qubits. Construction only checks the shape; the
/// physical invariants are checked on demand (is_valid) because derivative
/// and noisy intermediates legitimately violate them.
class DensityMatrix {
 public:
  explicit DensityMatrix(ComplexMatrix mat);

  static DensityMatrix basis_state(int n_qubits, std::uint64_t index);
  static DensityMatrix pure(const ComplexVector& ket);
  static DensityMatrix maximally_mixed(int n_qubits);
  /// |+><+| on every qubit.
  static DensityMatrix plus_state(int n_qubits);

  int n_qubits() const { return n_qubits_; }
  Eigen::Index dim() const { return mat_.rows(); }
  const ComplexMatrix& mat() const { return mat_; }

  double hermiticity_error() const;
  double trace_error() const;
  double min_eigenvalue() const;
  bool is_valid(double herm_tol = 1e-12, double trace_tol = 1e-12,
                double psd_tol = 1e-10) const;

 private:
  int n_qubits_;
  ComplexMatrix mat_;
};

enum class Pauli : std::uint8_t { I, X, Y, Z };

/// Tensor product of single-qubit Paulis with a complex prefactor.
class PauliString {
 public:
  PauliString(std::vector<Pauli> letters, Complex coefficient = 1.0);

  /// Parses "XIZ" (qubit 0 first).
  static PauliString parse(std::string_view letters, Complex coefficient = 1.0);
  static PauliString identity(int n_qubits, Complex coefficient = 1.0);
  static PauliString single(int n_qubits, int site, Pauli p,
                            Complex coefficient = 1.0);
  static PauliString pair(int n_qubits, int site_a, Pauli pa, int site_b,
                          Pauli pb, Complex coefficient = 1.0);

  int n_qubits() const { return static_cast<int>(letters_.size()); }
  const std::vector<Pauli>& letters() const { return letters_; }
  Pauli operator[](int q) const { return letters_[static_cast<std::size_t>(q)]; }
  Complex coefficient() const { return coefficient_; }
  void set_coefficient(Complex c) { coefficient_ = c; }

  /// Number of non-identity letters.
  int weight() const;
  std::vector<int> support() const;
  std::string to_string() const;

  /// Bits flipped by the X/Y letters, in basis-index layout.
  std::uint64_t flip_mask() const;

  /// P|index> = amplitude |index ^ flip_mask()>; returns (target index, amplitude).
  std::pair<std::uint64_t, Complex> apply_to_basis(std::uint64_t index) const;

  PauliString operator*(const PauliString& rhs) const;

 private:
  std::vector<Pauli> letters_;
  Complex coefficient_;
};

/// Real linear combination of Pauli strings with a display name, e.g. the
/// site-averaged magnetization.
struct Observable {
  std::string name;
  std::vector<PauliString> terms;
};

/// Configuration of n spins stored as the basis index it denotes.
class SpinConfig {
 public:
  SpinConfig(int n_sites, std::uint64_t index);
  /// Every entry must be +1 or -1.
  explicit SpinConfig(const std::vector<int>& spins);

  int size() const { return n_sites_; }
  std::uint64_t index() const { return index_; }
  int operator[](int site) const;
  SpinConfig flipped(int site) const;
  SpinConfig flipped_all() const;
  std::vector<int> spins() const;

  friend bool operator==(const SpinConfig&, const SpinConfig&) = default;

 private:
  int n_sites_;
  std::uint64_t index_;
};

/// Bit mask of qubit `site` in an n-qubit basis index.
constexpr std::uint64_t site_mask(int n_sites, int site) {
  return std::uint64_t{1} << (n_sites - 1 - site);
}

std::uint64_t config_to_index(const SpinConfig& c);
SpinConfig index_to_config(std::uint64_t index, int n_sites);

/// Kronecker product; the left factor owns the high-order bits.
ComplexMatrix tensor_product(const ComplexMatrix& a, const ComplexMatrix& b);

/// Traces out the listed qubits; the remaining qubits keep their relative order.
ComplexMatrix partial_trace(const ComplexMatrix& rho, std::span<const int> traced);

ComplexMatrix pauli_matrix(const PauliString& ps);

/// Re Tr(rho O). Throws NonHermitianError if |Im| > 1e-10.
double expectation(const DensityMatrix& rho, const PauliString& obs);
double expectation(const DensityMatrix& rho, const Observable& obs);

/// Hilbert-Schmidt inner product Tr(a^dagger b).
Complex hs_inner(const ComplexMatrix& a, const ComplexMatrix& b);

/// Applies a Pauli string to the rows (left multiply) or columns (right
/// multiply) of a dense matrix without materializing the operator.
ComplexMatrix pauli_left_multiply(const PauliString& p, const ComplexMatrix& m);
ComplexMatrix pauli_right_multiply(const ComplexMatrix& m, const PauliString& p);

}  // namespace dqnn
