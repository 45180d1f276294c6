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

#include "dqnn/qcore.hpp"

#include "dqnn/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dqnn {

Eigen::Index dim_for_qubits(int n_qubits) {
  if (n_qubits < 0 || n_qubits > 30) {
    throw DimensionError("qubit count out of range: " + std::to_string(n_qubits));
  }
  return Eigen::Index{1} << n_qubits;
}

int qubits_for_dim(Eigen::Index dim) {
  if (dim <= 0 || (dim & (dim - 1)) != 0) {
    throw DimensionError("dimension " + std::to_string(dim) + " is not a power of 2");
  }
  int n = 0;
  while ((Eigen::Index{1} << n) < dim) ++n;
  return n;
}

ComplexMatrix hermitian_part(const ComplexMatrix& m) {
  return (m + m.adjoint()) * 0.5;
}

double hermiticity_error(const ComplexMatrix& m) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

// --- DensityMatrix ---------------------------------------------------------

DensityMatrix::DensityMatrix(ComplexMatrix mat) : mat_(std::move(mat)) {
  if (mat_.rows() != mat_.cols()) {
    throw DimensionError("density matrix must be square");
  }
  n_qubits_ = qubits_for_dim(mat_.rows());
}

DensityMatrix DensityMatrix::basis_state(int n_qubits, std::uint64_t index) {
  const auto d = dim_for_qubits(n_qubits);
  if (index >= static_cast<std::uint64_t>(d)) {
    throw std::out_of_range("basis index out of range");
  }
  ComplexMatrix m = ComplexMatrix::Zero(d, d);
  m(static_cast<Eigen::Index>(index), static_cast<Eigen::Index>(index)) = 1.0;
  return DensityMatrix(std::move(m));
}

DensityMatrix DensityMatrix::pure(const ComplexVector& ket) {
  const double norm = ket.norm();
  if (norm == 0.0) throw ZeroWeightError("zero ket");
  const ComplexVector k = ket / norm;
  return DensityMatrix(k * k.adjoint());
}

DensityMatrix DensityMatrix::maximally_mixed(int n_qubits) {
  const auto d = dim_for_qubits(n_qubits);
  return DensityMatrix(ComplexMatrix::Identity(d, d) / static_cast<double>(d));
}

DensityMatrix DensityMatrix::plus_state(int n_qubits) {
  const auto d = dim_for_qubits(n_qubits);
  return DensityMatrix(ComplexMatrix::Constant(d, d, 1.0 / static_cast<double>(d)));
}

double DensityMatrix::hermiticity_error() const { return dqnn::hermiticity_error(mat_); }

double DensityMatrix::trace_error() const { return std::abs(mat_.trace() - 1.0); }

double DensityMatrix::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitian_part(mat_),
                                                  Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

bool DensityMatrix::is_valid(double herm_tol, double trace_tol, double psd_tol) const {
  return hermiticity_error() <= herm_tol && trace_error() <= trace_tol &&
         min_eigenvalue() >= -psd_tol;
}

// --- PauliString -----------------------------------------------------------

PauliString::PauliString(std::vector<Pauli> letters, Complex coefficient)
    : letters_(std::move(letters)), coefficient_(coefficient) {}

PauliString PauliString::parse(std::string_view letters, Complex coefficient) {
  std::vector<Pauli> out;
  out.reserve(letters.size());
  for (char c : letters) {
    switch (c) {
      case 'I': out.push_back(Pauli::I); break;
      case 'X': out.push_back(Pauli::X); break;
      case 'Y': out.push_back(Pauli::Y); break;
      case 'Z': out.push_back(Pauli::Z); break;
      default:
        throw std::invalid_argument(std::string("bad Pauli letter '") + c + "'");
    }
  }
  return PauliString(std::move(out), coefficient);
}

PauliString PauliString::identity(int n_qubits, Complex coefficient) {
  return PauliString(std::vector<Pauli>(static_cast<std::size_t>(n_qubits), Pauli::I),
                     coefficient);
}

PauliString PauliString::single(int n_qubits, int site, Pauli p, Complex coefficient) {
  if (site < 0 || site >= n_qubits) throw std::out_of_range("site out of range");
  auto ps = identity(n_qubits, coefficient);
  ps.letters_[static_cast<std::size_t>(site)] = p;
  return ps;
}

PauliString PauliString::pair(int n_qubits, int site_a, Pauli pa, int site_b, Pauli pb,
                              Complex coefficient) {
  if (site_a == site_b) throw std::invalid_argument("pair sites must differ");
  auto ps = single(n_qubits, site_a, pa, coefficient);
  if (site_b < 0 || site_b >= n_qubits) throw std::out_of_range("site out of range");
  ps.letters_[static_cast<std::size_t>(site_b)] = pb;
  return ps;
}

int PauliString::weight() const {
  return static_cast<int>(
      std::count_if(letters_.begin(), letters_.end(), [](Pauli p) { return p != Pauli::I; }));
}

std::vector<int> PauliString::support() const {
  std::vector<int> s;
  for (int q = 0; q < n_qubits(); ++q) {
    if (letters_[static_cast<std::size_t>(q)] != Pauli::I) s.push_back(q);
  }
  return s;
}

std::string PauliString::to_string() const {
  std::string s;
  for (Pauli p : letters_) s.push_back("IXYZ"[static_cast<int>(p)]);
  return s;
}

std::uint64_t PauliString::flip_mask() const {
  std::uint64_t mask = 0;
  const int n = n_qubits();
  for (int q = 0; q < n; ++q) {
    const Pauli p = letters_[static_cast<std::size_t>(q)];
    if (p == Pauli::X || p == Pauli::Y) mask |= site_mask(n, q);
  }
  return mask;
}

std::pair<std::uint64_t, Complex> PauliString::apply_to_basis(std::uint64_t index) const {
  Complex amp = coefficient_;
  const int n = n_qubits();
  for (int q = 0; q < n; ++q) {
    const bool bit = (index & site_mask(n, q)) != 0;
    switch (letters_[static_cast<std::size_t>(q)]) {
      case Pauli::I:
      case Pauli::X:
        break;
      case Pauli::Y:
        amp *= bit ? -kI : kI;
        break;
      case Pauli::Z:
        if (bit) amp = -amp;
        break;
    }
  }
  return {index ^ flip_mask(), amp};
}

namespace {

// Single-letter product a*b = phase * c.
std::pair<Pauli, Complex> multiply_letters(Pauli a, Pauli b) {
  if (a == Pauli::I) return {b, 1.0};
  if (b == Pauli::I) return {a, 1.0};
  if (a == b) return {Pauli::I, 1.0};
  const int ia = static_cast<int>(a);
  const int ib = static_cast<int>(b);
  const int ic = 6 - ia - ib;  // X=1, Y=2, Z=3
  const bool cyclic = (ib - ia + 3) % 3 == 1;
  return {static_cast<Pauli>(ic), cyclic ? kI : -kI};
}

}  // namespace

PauliString PauliString::operator*(const PauliString& rhs) const {
  if (n_qubits() != rhs.n_qubits()) throw DimensionError("Pauli string size mismatch");
  std::vector<Pauli> out(letters_.size());
  Complex c = coefficient_ * rhs.coefficient_;
  for (std::size_t q = 0; q < letters_.size(); ++q) {
    const auto [p, phase] = multiply_letters(letters_[q], rhs.letters_[q]);
    out[q] = p;
    c *= phase;
  }
  return PauliString(std::move(out), c);
}

// --- SpinConfig ------------------------------------------------------------

SpinConfig::SpinConfig(int n_sites, std::uint64_t index) : n_sites_(n_sites), index_(index) {
  if (n_sites < 0 || n_sites > 62) throw std::out_of_range("site count out of range");
  if (n_sites < 64 && (index >> n_sites) != 0) {
    throw std::out_of_range("configuration index out of range");
  }
}

SpinConfig::SpinConfig(const std::vector<int>& spins)
    : n_sites_(static_cast<int>(spins.size())), index_(0) {
  for (int j = 0; j < n_sites_; ++j) {
    const int s = spins[static_cast<std::size_t>(j)];
    if (s == -1) {
      index_ |= site_mask(n_sites_, j);
    } else if (s != 1) {
      throw std::invalid_argument("spin values must be +1 or -1");
    }
  }
}

int SpinConfig::operator[](int site) const {
  return (index_ & site_mask(n_sites_, site)) ? -1 : 1;
}

SpinConfig SpinConfig::flipped(int site) const {
  return SpinConfig(n_sites_, index_ ^ site_mask(n_sites_, site));
}

SpinConfig SpinConfig::flipped_all() const {
  return SpinConfig(n_sites_, index_ ^ ((std::uint64_t{1} << n_sites_) - 1));
}

std::vector<int> SpinConfig::spins() const {
  std::vector<int> s(static_cast<std::size_t>(n_sites_));
  for (int j = 0; j < n_sites_; ++j) s[static_cast<std::size_t>(j)] = (*this)[j];
  return s;
}

std::uint64_t config_to_index(const SpinConfig& c) { return c.index(); }

SpinConfig index_to_config(std::uint64_t index, int n_sites) {
  return SpinConfig(n_sites, index);
}

// --- dense operations ------------------------------------------------------

ComplexMatrix tensor_product(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

ComplexMatrix partial_trace(const ComplexMatrix& rho, std::span<const int> traced) {
  if (rho.rows() != rho.cols()) throw DimensionError("partial_trace needs a square matrix");
  const int n = qubits_for_dim(rho.rows());
  std::vector<bool> is_traced(static_cast<std::size_t>(n), false);
  for (int q : traced) {
    if (q < 0 || q >= n) throw std::out_of_range("traced qubit index out of range");
    is_traced[static_cast<std::size_t>(q)] = true;
  }
  std::vector<int> kept;
  std::vector<int> gone;
  for (int q = 0; q < n; ++q) (is_traced[static_cast<std::size_t>(q)] ? gone : kept).push_back(q);

  // Scatter a compact index over the given qubits into a full basis index.
  auto scatter = [n](const std::vector<int>& qubits) {
    const std::size_t count = std::size_t{1} << qubits.size();
    std::vector<Eigen::Index> full(count, 0);
    const int k = static_cast<int>(qubits.size());
    for (std::size_t c = 0; c < count; ++c) {
      std::uint64_t idx = 0;
      for (int b = 0; b < k; ++b) {
        if (c & (std::size_t{1} << (k - 1 - b))) idx |= site_mask(n, qubits[static_cast<std::size_t>(b)]);
      }
      full[c] = static_cast<Eigen::Index>(idx);
    }
    return full;
  };
  const auto kept_full = scatter(kept);
  const auto gone_full = scatter(gone);
  const auto dk = static_cast<Eigen::Index>(kept_full.size());

  ComplexMatrix out = ComplexMatrix::Zero(dk, dk);
  for (Eigen::Index c = 0; c < dk; ++c) {
    for (Eigen::Index r = 0; r < dk; ++r) {
      Complex acc = 0.0;
      for (Eigen::Index t : gone_full) {
        acc += rho(kept_full[static_cast<std::size_t>(r)] | t, kept_full[static_cast<std::size_t>(c)] | t);
      }
      out(r, c) = acc;
    }
  }
  return out;
}

ComplexMatrix pauli_matrix(const PauliString& ps) {
  const auto d = dim_for_qubits(ps.n_qubits());
  ComplexMatrix m = ComplexMatrix::Zero(d, d);
  for (Eigen::Index c = 0; c < d; ++c) {
    const auto [r, amp] = ps.apply_to_basis(static_cast<std::uint64_t>(c));
    m(static_cast<Eigen::Index>(r), c) = amp;
  }
  return m;
}

ComplexMatrix pauli_left_multiply(const PauliString& p, const ComplexMatrix& m) {
  const auto d = dim_for_qubits(p.n_qubits());
  if (m.rows() != d) throw DimensionError("Pauli string does not match matrix rows");
  ComplexMatrix out(m.rows(), m.cols());
  for (Eigen::Index k = 0; k < d; ++k) {
    const auto [t, amp] = p.apply_to_basis(static_cast<std::uint64_t>(k));
    out.row(static_cast<Eigen::Index>(t)) = amp * m.row(k);
  }
  return out;
}

ComplexMatrix pauli_right_multiply(const ComplexMatrix& m, const PauliString& p) {
  const auto d = dim_for_qubits(p.n_qubits());
  if (m.cols() != d) throw DimensionError("Pauli string does not match matrix columns");
  ComplexMatrix out(m.rows(), m.cols());
  for (Eigen::Index c = 0; c < d; ++c) {
    const auto [t, amp] = p.apply_to_basis(static_cast<std::uint64_t>(c));
    out.col(c) = amp * m.col(static_cast<Eigen::Index>(t));
  }
  return out;
}

double expectation(const DensityMatrix& rho, const PauliString& obs) {
  if (obs.n_qubits() != rho.n_qubits()) {
    throw DimensionError("observable acts on " + std::to_string(obs.n_qubits()) +
                         " qubits, state has " + std::to_string(rho.n_qubits()));
  }
  // Tr(rho P) = sum_c <c|rho P|c> = sum_c amp(c) rho(c, P(c)).
  Complex acc = 0.0;
  const auto d = rho.dim();
  for (Eigen::Index c = 0; c < d; ++c) {
    const auto [t, amp] = obs.apply_to_basis(static_cast<std::uint64_t>(c));
    acc += amp * rho.mat()(c, static_cast<Eigen::Index>(t));
  }
  if (std::abs(acc.imag()) > 1e-10) {
    throw NonHermitianError("expectation value has imaginary part " +
                            std::to_string(acc.imag()));
  }
  return acc.real();
}

double expectation(const DensityMatrix& rho, const Observable& obs) {
  double acc = 0.0;
  for (const auto& t : obs.terms) acc += expectation(rho, t);
  return acc;
}

Complex hs_inner(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError("hs_inner dimension mismatch");
  }
  return (a.conjugate().cwiseProduct(b)).sum();
}

}  // namespace dqnn
