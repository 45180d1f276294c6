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
 * @file network.hpp
 * Layered feedforward density-matrix ansatz built from 3-qubit perceptrons.
 *
 * A perceptron couples two input qubits of layer i (q0, q1) to one output
 * qubit of layer i+1 (q2). Its circuit is
 *
 *     R(q0) R(q1) R(q2)
 *     3 x [ CNOT(q0->q2) CNOT(q1->q2) R(q0) R(q1) R(q2) ]
 *
 * with R(t) = exp(i t1 Z/2) exp(i t2 X/2) exp(i t3 Z/2), i.e. 12 Euler triples
 * consumed in the order written above (36 angles in total).
 */
#pragma once

#include "dqnn/qcore.hpp"

#include <array>
#include <span>
#include <vector>

namespace dqnn {

inline constexpr int kAnglesPerPerceptron = 36;

using PerceptronAngles = std::array<double, kAnglesPerPerceptron>;

/// Flat parameter vector Theta; the index map lives on NetworkTopology.
using ParamVector = RealVector;

enum class Connectivity { LocalModulo, Full };
enum class Tying { Untied, TiedPerLayer };
/// State of freshly initialized qubits (input layer and every new layer).
enum class FreshState { Plus, Zero };

/// Qubit indices of one perceptron, local to its layer transition:
/// in_a and in_b index the input layer, out indexes the output layer.
struct PerceptronWiring {
  int in_a;
  int in_b;
  int out;
};

/// Location of one angle inside the network.
struct ParamSlot {
  int transition;
  int perceptron;
  int angle;
};

class NetworkTopology {
 public:
  explicit NetworkTopology(std::vector<int> layer_sizes,
                           Connectivity connectivity = Connectivity::LocalModulo,
                           Tying tying = Tying::TiedPerLayer,
                           FreshState fresh = FreshState::Plus);

  const std::vector<int>& layer_sizes() const { return layer_sizes_; }
  int n_layers() const { return static_cast<int>(layer_sizes_.size()); }
  int n_transitions() const { return n_layers() - 1; }
  int n_inputs() const { return layer_sizes_.front(); }
  int n_outputs() const { return layer_sizes_.back(); }
  Connectivity connectivity() const { return connectivity_; }
  Tying tying() const { return tying_; }
  FreshState fresh_state() const { return fresh_; }

  /// Perceptrons of transition t (layer t -> t+1) in application order.
  const std::vector<PerceptronWiring>& perceptrons(int transition) const;
  int total_perceptrons() const;

  int n_params() const;
  /// Flat index read by angle `angle` of perceptron `perceptron` in `transition`.
  int param_index(int transition, int perceptron, int angle) const;
  /// Every gate slot that reads parameter idx (one entry unless tied).
  std::vector<ParamSlot> occurrences(int idx) const;

  /// Largest register (two adjacent layers) touched by a feedforward.
  Eigen::Index peak_register_dim() const;

 private:
  std::vector<int> layer_sizes_;
  Connectivity connectivity_;
  Tying tying_;
  FreshState fresh_;
  std::vector<std::vector<PerceptronWiring>> wiring_;
  std::vector<int> offsets_;  // untied: first flat index of each transition
};

/// 8x8 perceptron unitary; qubit order (q0, q1, q2) with q0 most significant.
ComplexMatrix perceptron_unitary(const PerceptronAngles& angles);

/// Single-qubit Euler rotation exp(i a Z/2) exp(i b X/2) exp(i c Z/2).
Eigen::Matrix2cd euler_rotation(double a, double b, double c);

/**
 * Applies one layer transition: Tr_in[U (rho_in (x) fresh^{n_out}) U^dagger],
 * U being the product of the perceptron unitaries applied in list order.
 */
DensityMatrix layer_map(const DensityMatrix& rho_in,
                        std::span<const ComplexMatrix> unitaries,
                        std::span<const PerceptronWiring> wiring, int n_out,
                        FreshState fresh = FreshState::Plus);

/// Angles of every perceptron, indexed [transition][perceptron].
std::vector<std::vector<PerceptronAngles>> angle_table(const NetworkTopology& topo,
                                                       const ParamVector& params);

/// Output-layer state.
DensityMatrix feedforward(const NetworkTopology& topo, const ParamVector& params);

/// Feedforward from an explicit per-perceptron angle table.
DensityMatrix feedforward(const NetworkTopology& topo,
                          const std::vector<std::vector<PerceptronAngles>>& angles);

/**
 * d rho / d Theta_idx by the shift rule, evaluated literally: two complete
 * feedforwards per gate occurrence, summed over occurrences.
 */
ComplexMatrix parameter_shift_derivative(const NetworkTopology& topo,
                                         const ParamVector& params, int idx);

/**
 * Forward pass that keeps per-layer states and transfer maps so that all
 * shift-rule derivatives can be produced without re-running the layers
 * upstream of each gate. Results agree with parameter_shift_derivative to
 * rounding.
 */
class NetworkEvaluation {
 public:
  NetworkEvaluation(const NetworkTopology& topo, const ParamVector& params);

  const ComplexMatrix& rho() const { return states_.back(); }
  /// State of layer i (0 = input layer).
  const ComplexMatrix& layer_state(int i) const { return states_[static_cast<std::size_t>(i)]; }

  /// All derivatives, index-aligned with the parameter vector.
  std::vector<ComplexMatrix> derivatives() const;
  ComplexMatrix derivative(int idx) const;

 private:
  // Applies transitions t..end to a layer-t output perturbation.
  ComplexMatrix push_forward(int first_transition, ComplexMatrix x) const;

  NetworkTopology topo_;
  std::vector<std::vector<PerceptronAngles>> angles_;
  std::vector<ComplexMatrix> states_;     // n_layers entries
  std::vector<ComplexMatrix> transfers_;  // n_transitions entries
};

}  // namespace dqnn
