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

#include "dqnn/network.hpp"

#include "dqnn/errors.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace dqnn {

namespace {

constexpr int kMaxRegisterQubits = 16;
constexpr double kHalfPi = std::numbers::pi / 2.0;

// Qubit (within the 3-qubit perceptron) rotated by Euler triple t.
constexpr int triple_qubit(int t) { return t < 3 ? t : (t - 3) % 3; }

ComplexMatrix embed_single(const Eigen::Matrix2cd& r, int qubit) {
  const ComplexMatrix i2 = ComplexMatrix::Identity(2, 2);
  const ComplexMatrix i4 = ComplexMatrix::Identity(4, 4);
  switch (qubit) {
    case 0: return tensor_product(r, i4);
    case 1: return tensor_product(i2, tensor_product(r, i2));
    default: return tensor_product(i4, r);
  }
}

// CNOT on 3 qubits with target q2.
ComplexMatrix cnot_to_q2(int control) {
  ComplexMatrix m = ComplexMatrix::Zero(8, 8);
  const int cmask = control == 0 ? 4 : 2;
  for (int c = 0; c < 8; ++c) {
    const int r = (c & cmask) ? (c ^ 1) : c;
    m(r, c) = 1.0;
  }
  return m;
}

using Matrix8cd = Eigen::Matrix<Complex, 8, 8>;

// Left-multiplies the rows of w by an 8x8 matrix (column-major data) acting
// on register qubits (qa, qb, qc) of an nq-qubit register.
void apply_gate3(ComplexMatrix& w, const Complex* u, int nq, int qa, int qb, int qc) {
  const std::uint64_t ma = site_mask(nq, qa);
  const std::uint64_t mb = site_mask(nq, qb);
  const std::uint64_t mc = site_mask(nq, qc);
  const std::uint64_t all = ma | mb | mc;
  Eigen::Index offs[8];
  for (int k = 0; k < 8; ++k) {
    offs[k] = static_cast<Eigen::Index>(((k & 4) ? ma : 0) | ((k & 2) ? mb : 0) | ((k & 1) ? mc : 0));
  }
  const auto d = w.rows();
  std::vector<Eigen::Index> bases;
  bases.reserve(static_cast<std::size_t>(d / 8));
  for (Eigen::Index base = 0; base < d; ++base) {
    if ((static_cast<std::uint64_t>(base) & all) == 0) bases.push_back(base);
  }
  Complex v[8];
  for (Eigen::Index col = 0; col < w.cols(); ++col) {
    Complex* data = w.col(col).data();
    for (Eigen::Index base : bases) {
      for (int k = 0; k < 8; ++k) v[k] = data[base + offs[k]];
      for (int r = 0; r < 8; ++r) {
        Complex acc = u[r] * v[0];
        for (int k = 1; k < 8; ++k) acc += u[r + 8 * k] * v[k];
        data[base + offs[r]] = acc;
      }
    }
  }
}

ComplexVector fresh_qubit(FreshState fresh) {
  ComplexVector v(2);
  if (fresh == FreshState::Plus) {
    v << std::sqrt(0.5), std::sqrt(0.5);
  } else {
    v << 1.0, 0.0;
  }
  return v;
}

ComplexMatrix fresh_register_state(int n, FreshState fresh) {
  const ComplexVector q = fresh_qubit(fresh);
  ComplexVector ket = ComplexVector::Ones(1);
  for (int i = 0; i < n; ++i) {
    ComplexVector next(ket.size() * 2);
    for (Eigen::Index a = 0; a < ket.size(); ++a) {
      next(2 * a) = ket(a) * q(0);
      next(2 * a + 1) = ket(a) * q(1);
    }
    ket = std::move(next);
  }
  return ket * ket.adjoint();
}

// W0 column a = e_a (x) fresh^{n_out}; inputs own the high bits.
ComplexMatrix initial_transfer(int n_in, int n_out, FreshState fresh) {
  const auto m = dim_for_qubits(n_in);
  const auto dout = dim_for_qubits(n_out);
  const ComplexVector q = fresh_qubit(fresh);
  ComplexVector out_ket = ComplexVector::Ones(1);
  for (int i = 0; i < n_out; ++i) {
    ComplexVector next(out_ket.size() * 2);
    for (Eigen::Index a = 0; a < out_ket.size(); ++a) {
      next(2 * a) = out_ket(a) * q(0);
      next(2 * a + 1) = out_ket(a) * q(1);
    }
    out_ket = std::move(next);
  }
  ComplexMatrix w = ComplexMatrix::Zero(m * dout, m);
  for (Eigen::Index a = 0; a < m; ++a) w.block(a * dout, a, dout, 1) = out_ket;
  return w;
}

void apply_perceptron(ComplexMatrix& w, const Complex* u, const PerceptronWiring& p, int n_in,
                      int n_out) {
  apply_gate3(w, u, n_in + n_out, p.in_a, p.in_b, n_in + p.out);
}

void apply_perceptron(ComplexMatrix& w, const ComplexMatrix& u, const PerceptronWiring& p,
                      int n_in, int n_out) {
  apply_perceptron(w, u.data(), p, n_in, n_out);
}

// Elementary gates of the perceptron circuit in time order. Rotation gates
// carry the angle slot they read and their Pauli generator.
struct ElementaryGate {
  Matrix8cd mat;
  int slot;  // -1 for CNOT
  Matrix8cd generator;
};

Matrix8cd embed8(const Eigen::Matrix2cd& g, int qubit) {
  Matrix8cd out = Matrix8cd::Zero();
  for (int c = 0; c < 8; ++c) {
    const int bit = 2 - qubit;
    const int cb = (c >> bit) & 1;
    for (int rb = 0; rb < 2; ++rb) {
      const int r = (c & ~(1 << bit)) | (rb << bit);
      out(r, c) = g(rb, cb);
    }
  }
  return out;
}

std::vector<ElementaryGate> elementary_gates(const PerceptronAngles& angles) {
  static const Matrix8cd c0 = cnot_to_q2(0);
  static const Matrix8cd c1 = cnot_to_q2(1);
  Eigen::Matrix2cd x;
  x << 0.0, 1.0, 1.0, 0.0;
  Eigen::Matrix2cd z;
  z << 1.0, 0.0, 0.0, -1.0;
  std::vector<ElementaryGate> gates;
  gates.reserve(42);
  auto rotations = [&](int t) {
    const int q = triple_qubit(t);
    // exp(i a Z/2) exp(i b X/2) exp(i c Z/2): c acts first.
    for (int comp : {2, 1, 0}) {
      const int slot = 3 * t + comp;
      const double th = angles[static_cast<std::size_t>(slot)];
      const Eigen::Matrix2cd& g = comp == 1 ? x : z;
      const Eigen::Matrix2cd r =
          std::cos(th / 2) * Eigen::Matrix2cd::Identity() + kI * std::sin(th / 2) * g;
      gates.push_back({embed8(r, q), slot, embed8(g, q)});
    }
  };
  for (int t = 0; t < 3; ++t) rotations(t);
  for (int block = 0; block < 3; ++block) {
    gates.push_back({c0, -1, Matrix8cd::Zero()});
    gates.push_back({c1, -1, Matrix8cd::Zero()});
    for (int t = 3 + 3 * block; t < 6 + 3 * block; ++t) rotations(t);
  }
  return gates;
}

// For every angle slot s, the perceptron unitary with the generator of the
// gate reading s inserted right after that gate: d U / d theta_s = (i/2) K_s.
std::array<Matrix8cd, kAnglesPerPerceptron> generator_insertions(const PerceptronAngles& angles) {
  const auto gates = elementary_gates(angles);
  const std::size_t k = gates.size();
  std::vector<Matrix8cd> pre(k + 1);   // pre[i] = g_{i-1} ... g_0
  std::vector<Matrix8cd> post(k + 1);  // post[i] = g_{k-1} ... g_i
  pre[0] = Matrix8cd::Identity();
  for (std::size_t i = 0; i < k; ++i) pre[i + 1] = gates[i].mat * pre[i];
  post[k] = Matrix8cd::Identity();
  for (std::size_t i = k; i-- > 0;) post[i] = post[i + 1] * gates[i].mat;
  std::array<Matrix8cd, kAnglesPerPerceptron> out;
  for (std::size_t i = 0; i < k; ++i) {
    if (gates[i].slot < 0) continue;
    out[static_cast<std::size_t>(gates[i].slot)] = post[i + 1] * gates[i].generator * pre[i + 1];
  }
  return out;
}

// Phi(X) = sum_x W_x X W_x^dagger over input-register basis index x.
ComplexMatrix apply_transfer(const ComplexMatrix& w, const ComplexMatrix& x, Eigen::Index dout) {
  const Eigen::Index m = w.cols();
  const ComplexMatrix y = w * x;
  ComplexMatrix out = ComplexMatrix::Zero(dout, dout);
  for (Eigen::Index b = 0; b < m; ++b) {
    out.noalias() += y.middleRows(b * dout, dout) * w.middleRows(b * dout, dout).adjoint();
  }
  return out;
}

ComplexMatrix build_transfer(std::span<const ComplexMatrix> unitaries,
                             std::span<const PerceptronWiring> wiring, int n_in, int n_out,
                             FreshState fresh) {
  ComplexMatrix w = initial_transfer(n_in, n_out, fresh);
  for (std::size_t p = 0; p < wiring.size(); ++p) {
    apply_perceptron(w, unitaries[p], wiring[p], n_in, n_out);
  }
  return w;
}

std::vector<ComplexMatrix> unitaries_for(const std::vector<PerceptronAngles>& angles) {
  std::vector<ComplexMatrix> us;
  us.reserve(angles.size());
  for (const auto& a : angles) us.push_back(perceptron_unitary(a));
  return us;
}

}  // namespace

// --- topology --------------------------------------------------------------

NetworkTopology::NetworkTopology(std::vector<int> layer_sizes, Connectivity connectivity,
                                 Tying tying, FreshState fresh)
    : layer_sizes_(std::move(layer_sizes)),
      connectivity_(connectivity),
      tying_(tying),
      fresh_(fresh) {
  if (layer_sizes_.size() < 2) throw DimensionError("a network needs at least two layers");
  for (std::size_t i = 0; i < layer_sizes_.size(); ++i) {
    const int n = layer_sizes_[i];
    if (n < 1) throw DimensionError("layer " + std::to_string(i) + " has no qubits");
    if (i + 1 < layer_sizes_.size() && n < 2) {
      throw DimensionError("layer " + std::to_string(i) +
                           " feeds perceptrons and needs at least two qubits");
    }
  }
  for (std::size_t i = 0; i + 1 < layer_sizes_.size(); ++i) {
    if (layer_sizes_[i] + layer_sizes_[i + 1] > kMaxRegisterQubits) {
      throw SizeGuardError("layers " + std::to_string(i) + " and " + std::to_string(i + 1) +
                           " exceed the register guard of " +
                           std::to_string(kMaxRegisterQubits) + " qubits");
    }
  }

  int offset = 0;
  for (std::size_t i = 0; i + 1 < layer_sizes_.size(); ++i) {
    const int n_in = layer_sizes_[i];
    const int n_out = layer_sizes_[i + 1];
    std::vector<PerceptronWiring> ps;
    for (int j = 0; j < n_out; ++j) {
      if (connectivity_ == Connectivity::LocalModulo) {
        ps.push_back({j % n_in, (j + 1) % n_in, j});
      } else {
        for (int a = 0; a < n_in; ++a) {
          for (int b = a + 1; b < n_in; ++b) ps.push_back({a, b, j});
        }
      }
    }
    offsets_.push_back(offset);
    offset += tying_ == Tying::TiedPerLayer ? kAnglesPerPerceptron
                                            : static_cast<int>(ps.size()) * kAnglesPerPerceptron;
    wiring_.push_back(std::move(ps));
  }
  offsets_.push_back(offset);
}

const std::vector<PerceptronWiring>& NetworkTopology::perceptrons(int transition) const {
  if (transition < 0 || transition >= n_transitions()) {
    throw std::out_of_range("transition index out of range");
  }
  return wiring_[static_cast<std::size_t>(transition)];
}

int NetworkTopology::total_perceptrons() const {
  int n = 0;
  for (const auto& w : wiring_) n += static_cast<int>(w.size());
  return n;
}

int NetworkTopology::n_params() const { return offsets_.back(); }

int NetworkTopology::param_index(int transition, int perceptron, int angle) const {
  const auto& ps = perceptrons(transition);
  if (perceptron < 0 || perceptron >= static_cast<int>(ps.size()) || angle < 0 ||
      angle >= kAnglesPerPerceptron) {
    throw std::out_of_range("parameter slot out of range");
  }
  const int base = offsets_[static_cast<std::size_t>(transition)];
  return tying_ == Tying::TiedPerLayer ? base + angle
                                       : base + perceptron * kAnglesPerPerceptron + angle;
}

std::vector<ParamSlot> NetworkTopology::occurrences(int idx) const {
  if (idx < 0 || idx >= n_params()) {
    throw std::out_of_range("parameter index " + std::to_string(idx) + " out of range [0, " +
                            std::to_string(n_params()) + ")");
  }
  int t = 0;
  while (offsets_[static_cast<std::size_t>(t + 1)] <= idx) ++t;
  const int local = idx - offsets_[static_cast<std::size_t>(t)];
  std::vector<ParamSlot> out;
  if (tying_ == Tying::TiedPerLayer) {
    const int np = static_cast<int>(perceptrons(t).size());
    for (int p = 0; p < np; ++p) out.push_back({t, p, local});
  } else {
    out.push_back({t, local / kAnglesPerPerceptron, local % kAnglesPerPerceptron});
  }
  return out;
}

Eigen::Index NetworkTopology::peak_register_dim() const {
  Eigen::Index peak = 0;
  for (std::size_t i = 0; i + 1 < layer_sizes_.size(); ++i) {
    peak = std::max(peak, dim_for_qubits(layer_sizes_[i] + layer_sizes_[i + 1]));
  }
  return peak;
}

// --- gates -----------------------------------------------------------------

Eigen::Matrix2cd euler_rotation(double a, double b, double c) {
  Eigen::Matrix2cd rz_a;
  rz_a << std::exp(kI * (a / 2)), 0.0, 0.0, std::exp(-kI * (a / 2));
  Eigen::Matrix2cd rx_b;
  rx_b << std::cos(b / 2), kI * std::sin(b / 2), kI * std::sin(b / 2), std::cos(b / 2);
  Eigen::Matrix2cd rz_c;
  rz_c << std::exp(kI * (c / 2)), 0.0, 0.0, std::exp(-kI * (c / 2));
  return rz_a * rx_b * rz_c;
}

ComplexMatrix perceptron_unitary(const PerceptronAngles& angles) {
  static const ComplexMatrix c0 = cnot_to_q2(0);
  static const ComplexMatrix c1 = cnot_to_q2(1);
  auto rot = [&angles](int t) {
    const auto k = static_cast<std::size_t>(3 * t);
    return embed_single(euler_rotation(angles[k], angles[k + 1], angles[k + 2]), triple_qubit(t));
  };
  ComplexMatrix u = rot(2) * rot(1) * rot(0);
  for (int block = 0; block < 3; ++block) {
    const int t0 = 3 + 3 * block;
    u = rot(t0 + 2) * rot(t0 + 1) * rot(t0) * c1 * c0 * u;
  }
  return u;
}

// --- feedforward -----------------------------------------------------------

DensityMatrix layer_map(const DensityMatrix& rho_in, std::span<const ComplexMatrix> unitaries,
                        std::span<const PerceptronWiring> wiring, int n_out, FreshState fresh) {
  const int n_in = rho_in.n_qubits();
  if (unitaries.size() != wiring.size()) {
    throw DimensionError("one unitary per perceptron wiring expected");
  }
  if (n_out < 1 || n_in + n_out > kMaxRegisterQubits) {
    throw DimensionError("output layer size out of range");
  }
  for (std::size_t p = 0; p < wiring.size(); ++p) {
    const auto& w = wiring[p];
    if (w.in_a < 0 || w.in_a >= n_in || w.in_b < 0 || w.in_b >= n_in || w.in_a == w.in_b ||
        w.out < 0 || w.out >= n_out) {
      throw DimensionError("perceptron " + std::to_string(p) +
                           " references a nonexistent or repeated qubit");
    }
    if (unitaries[p].rows() != 8 || unitaries[p].cols() != 8) {
      throw DimensionError("perceptron unitaries must be 8x8");
    }
  }
  const ComplexMatrix w = build_transfer(unitaries, wiring, n_in, n_out, fresh);
  return DensityMatrix(hermitian_part(apply_transfer(w, rho_in.mat(), dim_for_qubits(n_out))));
}

std::vector<std::vector<PerceptronAngles>> angle_table(const NetworkTopology& topo,
                                                       const ParamVector& params) {
  if (params.size() != topo.n_params()) {
    throw DimensionError("parameter vector has " + std::to_string(params.size()) +
                         " entries, topology needs " + std::to_string(topo.n_params()));
  }
  std::vector<std::vector<PerceptronAngles>> table(static_cast<std::size_t>(topo.n_transitions()));
  for (int t = 0; t < topo.n_transitions(); ++t) {
    const int np = static_cast<int>(topo.perceptrons(t).size());
    auto& row = table[static_cast<std::size_t>(t)];
    row.resize(static_cast<std::size_t>(np));
    for (int p = 0; p < np; ++p) {
      for (int s = 0; s < kAnglesPerPerceptron; ++s) {
        row[static_cast<std::size_t>(p)][static_cast<std::size_t>(s)] =
            params(topo.param_index(t, p, s));
      }
    }
  }
  return table;
}

DensityMatrix feedforward(const NetworkTopology& topo,
                          const std::vector<std::vector<PerceptronAngles>>& angles) {
  if (static_cast<int>(angles.size()) != topo.n_transitions()) {
    throw DimensionError("angle table does not match the topology");
  }
  const auto& sizes = topo.layer_sizes();
  ComplexMatrix rho = fresh_register_state(sizes[0], topo.fresh_state());
  for (int t = 0; t < topo.n_transitions(); ++t) {
    const auto& wiring = topo.perceptrons(t);
    const auto& row = angles[static_cast<std::size_t>(t)];
    if (row.size() != wiring.size()) throw DimensionError("angle table does not match the topology");
    const auto us = unitaries_for(row);
    const int n_in = sizes[static_cast<std::size_t>(t)];
    const int n_out = sizes[static_cast<std::size_t>(t + 1)];
    const ComplexMatrix w = build_transfer(us, wiring, n_in, n_out, topo.fresh_state());
    rho = hermitian_part(apply_transfer(w, rho, dim_for_qubits(n_out)));
  }
  return DensityMatrix(std::move(rho));
}

DensityMatrix feedforward(const NetworkTopology& topo, const ParamVector& params) {
  return feedforward(topo, angle_table(topo, params));
}

ComplexMatrix parameter_shift_derivative(const NetworkTopology& topo, const ParamVector& params,
                                         int idx) {
  const auto slots = topo.occurrences(idx);
  const auto base = angle_table(topo, params);
  const auto d = dim_for_qubits(topo.n_outputs());
  ComplexMatrix acc = ComplexMatrix::Zero(d, d);
  for (const auto& s : slots) {
    auto plus = base;
    auto minus = base;
    auto& ap = plus[static_cast<std::size_t>(s.transition)][static_cast<std::size_t>(s.perceptron)];
    auto& am = minus[static_cast<std::size_t>(s.transition)][static_cast<std::size_t>(s.perceptron)];
    ap[static_cast<std::size_t>(s.angle)] += kHalfPi;
    am[static_cast<std::size_t>(s.angle)] -= kHalfPi;
    acc += 0.5 * (feedforward(topo, plus).mat() - feedforward(topo, minus).mat());
  }
  return acc;
}

// --- cached evaluation -----------------------------------------------------

NetworkEvaluation::NetworkEvaluation(const NetworkTopology& topo, const ParamVector& params)
    : topo_(topo), angles_(angle_table(topo, params)) {
  const auto& sizes = topo_.layer_sizes();
  states_.push_back(fresh_register_state(sizes[0], topo_.fresh_state()));
  for (int t = 0; t < topo_.n_transitions(); ++t) {
    const int n_in = sizes[static_cast<std::size_t>(t)];
    const int n_out = sizes[static_cast<std::size_t>(t + 1)];
    const auto us = unitaries_for(angles_[static_cast<std::size_t>(t)]);
    transfers_.push_back(build_transfer(us, topo_.perceptrons(t), n_in, n_out, topo_.fresh_state()));
    states_.push_back(
        hermitian_part(apply_transfer(transfers_.back(), states_.back(), dim_for_qubits(n_out))));
  }
}

ComplexMatrix NetworkEvaluation::push_forward(int first_transition, ComplexMatrix x) const {
  const auto& sizes = topo_.layer_sizes();
  for (int t = first_transition; t < topo_.n_transitions(); ++t) {
    x = apply_transfer(transfers_[static_cast<std::size_t>(t)], x,
                       dim_for_qubits(sizes[static_cast<std::size_t>(t + 1)]));
  }
  return hermitian_part(x);
}

std::vector<ComplexMatrix> NetworkEvaluation::derivatives() const {
  const auto& sizes = topo_.layer_sizes();
  std::vector<ComplexMatrix> local(static_cast<std::size_t>(topo_.n_params()));

  for (int t = 0; t < topo_.n_transitions(); ++t) {
    const int n_in = sizes[static_cast<std::size_t>(t)];
    const int n_out = sizes[static_cast<std::size_t>(t + 1)];
    const auto dout = dim_for_qubits(n_out);
    const auto& wiring = topo_.perceptrons(t);
    const auto& row = angles_[static_cast<std::size_t>(t)];
    const auto us = unitaries_for(row);
    const ComplexMatrix& rho_t = states_[static_cast<std::size_t>(t)];

    // prefix[p] = U_{p-1} ... U_0 W0
    std::vector<ComplexMatrix> prefix;
    prefix.push_back(initial_transfer(n_in, n_out, topo_.fresh_state()));
    for (std::size_t p = 0; p < wiring.size(); ++p) {
      prefix.push_back(prefix.back());
      apply_perceptron(prefix.back(), us[p], wiring[p], n_in, n_out);
    }

    // d Phi / d theta = (i/2) sum_x [Wg_x X W_x^+ - h.c.] with the generator
    // Wg inserted at the rotation reading theta.
    const ComplexMatrix z = rho_t * prefix.back().adjoint();
    const auto m = static_cast<Eigen::Index>(dim_for_qubits(n_in));
    for (std::size_t p = 0; p < wiring.size(); ++p) {
      const auto gens = generator_insertions(row[p]);
      for (int s = 0; s < kAnglesPerPerceptron; ++s) {
        ComplexMatrix w = prefix[p];
        apply_perceptron(w, gens[static_cast<std::size_t>(s)].data(), wiring[p], n_in, n_out);
        for (std::size_t q = p + 1; q < wiring.size(); ++q) apply_perceptron(w, us[q], wiring[q], n_in, n_out);
        ComplexMatrix d = ComplexMatrix::Zero(dout, dout);
        for (Eigen::Index x = 0; x < m; ++x) {
          d.noalias() += w.middleRows(x * dout, dout) * z.middleCols(x * dout, dout);
        }
        ComplexMatrix delta = (0.5 * kI) * (d - d.adjoint());
        auto& slot = local[static_cast<std::size_t>(topo_.param_index(t, static_cast<int>(p), s))];
        if (slot.size() == 0) {
          slot = std::move(delta);
        } else {
          slot += delta;
        }
      }
    }
  }

  std::vector<ComplexMatrix> out(local.size());
  for (int idx = 0; idx < topo_.n_params(); ++idx) {
    const int t = topo_.occurrences(idx).front().transition;
    out[static_cast<std::size_t>(idx)] = push_forward(t + 1, std::move(local[static_cast<std::size_t>(idx)]));
  }
  return out;
}

ComplexMatrix NetworkEvaluation::derivative(int idx) const {
  const auto slots = topo_.occurrences(idx);
  const auto& sizes = topo_.layer_sizes();
  const int t = slots.front().transition;
  const int n_in = sizes[static_cast<std::size_t>(t)];
  const int n_out = sizes[static_cast<std::size_t>(t + 1)];
  const auto& wiring = topo_.perceptrons(t);
  const auto& row = angles_[static_cast<std::size_t>(t)];
  const auto us = unitaries_for(row);
  const auto dout = dim_for_qubits(n_out);
  ComplexMatrix acc = ComplexMatrix::Zero(dout, dout);
  for (const auto& s : slots) {
    for (double shift : {kHalfPi, -kHalfPi}) {
      auto shifted = us;
      PerceptronAngles a = row[static_cast<std::size_t>(s.perceptron)];
      a[static_cast<std::size_t>(s.angle)] += shift;
      shifted[static_cast<std::size_t>(s.perceptron)] = perceptron_unitary(a);
      const ComplexMatrix w = build_transfer(shifted, wiring, n_in, n_out, topo_.fresh_state());
      acc += (shift > 0 ? 0.5 : -0.5) * apply_transfer(w, states_[static_cast<std::size_t>(t)], dout);
    }
  }
  return push_forward(t + 1, std::move(acc));
}

}  // namespace dqnn
