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

#include "dqnn/shotsim.hpp"

#include "dqnn/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace dqnn {

namespace {

constexpr double kHalfPi = std::numbers::pi / 2.0;

// Tr[a b] without forming the product.
Complex trace_product(const ComplexMatrix& a, const ComplexMatrix& b) {
  return (a.transpose().cwiseProduct(b)).sum();
}

void require_unitary(const PauliString& o, int n_qubits) {
  if (o.n_qubits() != n_qubits) throw DimensionError("operator does not match register size");
  if (std::abs(std::abs(o.coefficient()) - 1.0) > 1e-12) {
    throw std::invalid_argument("controlled operator " + o.to_string() + " is not unitary");
  }
}

void require_same_size(const DensityMatrix& a, const DensityMatrix& b) {
  if (a.n_qubits() != b.n_qubits()) {
    throw DimensionError("registers differ in size: " + std::to_string(a.n_qubits()) + " vs " +
                         std::to_string(b.n_qubits()));
  }
}

// Converts the register trace into the reported estimate, sampling if needed.
double measure(Complex z, Part part, const ShotConfig& cfg, Rng& rng) {
  double p0 = ancilla_p0(z, part);
  if (!cfg.exact()) {
    if (cfg.shots < 0) throw std::invalid_argument("shot count must be >= 0");
    p0 = std::clamp(p0, 0.0, 1.0);
    std::binomial_distribution<long> draw(cfg.shots, p0);
    p0 = static_cast<double>(draw(rng)) / static_cast<double>(cfg.shots);
  }
  return part == Part::Re ? 2.0 * p0 - 1.0 : 1.0 - 2.0 * p0;
}

// One density matrix reachable by the circuits, with its role in S and f.
struct Shifted {
  int param;
  double sign;  // +1 for +pi/2, -1 for -pi/2
  DensityMatrix state;
};

}  // namespace

double ancilla_p0(Complex z, Part part) {
  return part == Part::Re ? 0.5 + 0.5 * z.real() : 0.5 - 0.5 * z.imag();
}

double overlap_test(const DensityMatrix& a, const DensityMatrix& b, const ShotConfig& cfg,
                    Rng& rng) {
  require_same_size(a, b);
  return measure(trace_product(a.mat(), b.mat()), Part::Re, cfg, rng);
}

double ctrl_o_test(const DensityMatrix& a, const DensityMatrix& b, const PauliString& o, Part part,
                   const ShotConfig& cfg, Rng& rng) {
  require_same_size(a, b);
  require_unitary(o, a.n_qubits());
  return measure(trace_product(a.mat(), pauli_left_multiply(o, b.mat())), part, cfg, rng);
}

double ctrl_o1_o2_test(const DensityMatrix& a, const DensityMatrix& b, const PauliString& o1,
                       const PauliString& o2, Part part, const ShotConfig& cfg, Rng& rng) {
  require_same_size(a, b);
  require_unitary(o1, a.n_qubits());
  require_unitary(o2, a.n_qubits());
  const ComplexMatrix ob = pauli_right_multiply(pauli_left_multiply(o1, b.mat()), o2);
  return measure(trace_product(a.mat(), ob), part, cfg, rng);
}

namespace {

// One pass over every circuit at the configured shot count.
SrSystem assemble_once(const LindbladModel& m, const DensityMatrix& rho, int p,
                       const std::vector<Shifted>& shifted, const ShotConfig& cfg, Rng& rng) {
  const int n = m.n_sites;

  // Tr[A L rho] from controlled-Pauli circuits.
  auto trace_with_l_rho = [&](const DensityMatrix& a, double overlap_a_rho) {
    double acc = 0.0;
    for (const auto& t : m.ham_terms) {
      acc += 2.0 * t.coeff * ctrl_o_test(a, rho, t.op, Part::Im, cfg, rng);
    }
    for (const auto& j : m.jumps) {
      const auto z = PauliString::single(n, j.site, Pauli::Z);
      const auto x = PauliString::single(n, j.site, Pauli::X);
      const auto y = PauliString::single(n, j.site, Pauli::Y);
      // -gamma Re Tr[A P_up rho], P_up = (1 + Z) / 2
      acc -= j.rate * 0.5 * (overlap_a_rho + ctrl_o_test(a, rho, z, Part::Re, cfg, rng));
      // gamma Tr[A s- rho s+], s- rho s+ = (X rho X + Y rho Y + i X rho Y - i Y rho X) / 4
      const double re_xx = ctrl_o1_o2_test(a, rho, x, x, Part::Re, cfg, rng);
      const double re_yy = ctrl_o1_o2_test(a, rho, y, y, Part::Re, cfg, rng);
      const double im_xy = ctrl_o1_o2_test(a, rho, x, y, Part::Im, cfg, rng);
      const double im_yx = ctrl_o1_o2_test(a, rho, y, x, Part::Im, cfg, rng);
      acc += j.rate * 0.25 * (re_xx + re_yy - im_xy + im_yx);
    }
    return acc;
  };

  SrSystem sys;
  const double n2 = overlap_test(rho, rho, cfg, rng);
  if (!(n2 > 0.0)) {
    throw ZeroWeightError("purity estimate " + std::to_string(n2) +
                          " is not positive; increase the shot count");
  }
  if (!cfg.exact() && n2 >= 1.0) sys.flags.push_back("purity estimate saturated at 1");

  RealVector g = RealVector::Zero(p);     // <rho, d_mu rho>
  RealVector ell = RealVector::Zero(p);   // <d_mu rho, L rho>
  const auto count = shifted.size();
  std::vector<double> t_rho(count);
  for (std::size_t i = 0; i < count; ++i) {
    t_rho[i] = overlap_test(shifted[i].state, rho, cfg, rng);
    const auto mu = static_cast<Eigen::Index>(shifted[i].param);
    g(mu) += 0.5 * shifted[i].sign * t_rho[i];
    ell(mu) += 0.5 * shifted[i].sign * trace_with_l_rho(shifted[i].state, t_rho[i]);
  }
  const double c = trace_with_l_rho(rho, n2);

  RealMatrix gram = RealMatrix::Zero(p, p);  // <d_mu rho, d_nu rho>
  for (std::size_t i = 0; i < count; ++i) {
    for (std::size_t k = i; k < count; ++k) {
      const double t = overlap_test(shifted[i].state, shifted[k].state, cfg, rng);
      const double w = 0.25 * shifted[i].sign * shifted[k].sign * t;
      const auto a = static_cast<Eigen::Index>(shifted[i].param);
      const auto b = static_cast<Eigen::Index>(shifted[k].param);
      gram(a, b) += w;
      if (i != k) gram(b, a) += w;
    }
  }

  sys.s = gram / n2 - g * g.transpose() / (n2 * n2);
  sys.f = ell / n2 - g * (c / (n2 * n2));
  return sys;
}

}  // namespace

SrSystem assemble_shots(const LindbladModel& m, const NetworkTopology& topo,
                        const ParamVector& params, const ShotConfig& cfg, Rng& rng) {
  if (topo.n_outputs() != m.n_sites) throw DimensionError("network output does not match the model");
  if (cfg.batches < 0 || cfg.batches == 1 || (!cfg.exact() && cfg.batches > cfg.shots)) {
    throw std::invalid_argument("shot batches must be 0 or in [2, shots]");
  }
  const int p = topo.n_params();
  const auto base = angle_table(topo, params);
  const DensityMatrix rho = feedforward(topo, base);

  std::vector<Shifted> shifted;
  for (int mu = 0; mu < p; ++mu) {
    for (const auto& s : topo.occurrences(mu)) {
      for (double sign : {1.0, -1.0}) {
        auto table = base;
        table[static_cast<std::size_t>(s.transition)][static_cast<std::size_t>(s.perceptron)]
             [static_cast<std::size_t>(s.angle)] += sign * kHalfPi;
        shifted.push_back({mu, sign, feedforward(topo, table)});
      }
    }
  }
  if (cfg.exact() || cfg.batches == 0) return assemble_once(m, rho, p, shifted, cfg, rng);

  // Independent batches, each with an equal share of the shots; the estimate
  // is their mean and the error the spread of the batch means.
  ShotConfig sub = cfg;
  sub.shots = cfg.shots / cfg.batches;
  sub.batches = 0;
  std::vector<SrSystem> parts;
  for (int b = 0; b < cfg.batches; ++b) parts.push_back(assemble_once(m, rho, p, shifted, sub, rng));
  const double nb = cfg.batches;
  SrSystem out;
  out.s = RealMatrix::Zero(p, p);
  out.f = RealVector::Zero(p);
  for (const auto& x : parts) {
    out.s += x.s / nb;
    out.f += x.f / nb;
    for (const auto& flag : x.flags) {
      if (std::find(out.flags.begin(), out.flags.end(), flag) == out.flags.end()) out.flags.push_back(flag);
    }
  }
  out.s_stderr = RealMatrix::Zero(p, p);
  out.f_stderr = RealVector::Zero(p);
  for (const auto& x : parts) {
    out.s_stderr += (x.s - out.s).cwiseAbs2();
    out.f_stderr += (x.f - out.f).cwiseAbs2();
  }
  out.s_stderr = (out.s_stderr / (nb * (nb - 1.0))).cwiseSqrt();
  out.f_stderr = (out.f_stderr / (nb * (nb - 1.0))).cwiseSqrt();
  return out;
}

}  // namespace dqnn
