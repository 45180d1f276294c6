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

#include "dqnn/errors.hpp"
#include "dqnn/shotsim.hpp"
#include "dqnn/sr_solver.hpp"
#include "test_support.hpp"

#include <catch_amalgamated.hpp>

#include <numbers>

using namespace dqnn;

namespace {

const ShotConfig kExact{};

// Controlled-O on register A only, as a full A (x) B matrix.
ComplexMatrix on_a(const PauliString& o, Eigen::Index db) {
  return tensor_product(pauli_matrix(o), ComplexMatrix::Identity(db, db));
}

ComplexMatrix on_b(const PauliString& o, Eigen::Index da) {
  return tensor_product(ComplexMatrix::Identity(da, da), pauli_matrix(o));
}

// 2 P(0) - 1 read through the ancilla circuit.
double circuit_re(const DensityMatrix& a, const DensityMatrix& b, const ComplexMatrix& v) {
  return 2.0 * testing::ancilla_circuit_p0(a.mat(), b.mat(), v, 0.0) - 1.0;
}
double circuit_im(const DensityMatrix& a, const DensityMatrix& b, const ComplexMatrix& v) {
  return 1.0 - 2.0 * testing::ancilla_circuit_p0(a.mat(), b.mat(), v, std::numbers::pi / 2);
}

}  // namespace

TEST_CASE("ancilla probability closed form") {
  CHECK(ancilla_p0(Complex(1.0, 0.0), Part::Re) == 1.0);
  CHECK(ancilla_p0(Complex(0.0, 0.0), Part::Re) == 0.5);
  CHECK(std::abs(ancilla_p0(Complex(0.0, 1.0), Part::Im) - 0.0) < 1e-15);
}

TEST_CASE("overlap_test examples") {
  Rng rng(1);
  const auto up = DensityMatrix::basis_state(1, 0);
  const auto dn = DensityMatrix::basis_state(1, 1);
  const auto mixed = DensityMatrix::maximally_mixed(1);
  CHECK(std::abs(overlap_test(up, up, kExact, rng) - 1.0) < 1e-15);
  CHECK(std::abs(overlap_test(up, dn, kExact, rng)) < 1e-15);
  CHECK(std::abs(overlap_test(mixed, mixed, kExact, rng) - 0.5) < 1e-15);
  CHECK_THROWS_AS(overlap_test(up, DensityMatrix::plus_state(2), kExact, rng), DimensionError);
}

TEST_CASE("ctrl_o_test and ctrl_o1_o2_test examples") {
  Rng rng(2);
  const auto up = DensityMatrix::basis_state(1, 0);
  const auto mixed = DensityMatrix::maximally_mixed(1);
  const auto x = PauliString::parse("X");
  const auto z = PauliString::parse("Z");
  CHECK(std::abs(ctrl_o_test(up, up, z, Part::Re, kExact, rng) - 1.0) < 1e-15);
  CHECK(std::abs(ctrl_o_test(up, up, x, Part::Re, kExact, rng)) < 1e-15);
  CHECK(std::abs(ctrl_o1_o2_test(up, up, x, x, Part::Re, kExact, rng)) < 1e-15);
  CHECK(std::abs(ctrl_o1_o2_test(mixed, mixed, z, z, Part::Re, kExact, rng) - 0.5) < 1e-15);
  CHECK_THROWS_AS(ctrl_o_test(up, up, PauliString::parse("X", 2.0), Part::Re, kExact, rng),
                  std::invalid_argument);
}

TEST_CASE("circuit estimates match dense traces and the ancilla simulation") {
  Rng rng(3);
  double worst_trace = 0.0;
  double worst_circuit = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + trial % 2;
    const auto d = dim_for_qubits(n);
    const auto a = testing::random_density(n, rng);
    const auto b = testing::random_density(n, rng);
    const auto o1 = testing::random_pauli(n, rng);
    const auto o2 = testing::random_pauli(n, rng);
    const ComplexMatrix swap = testing::swap_registers(n);
    const ComplexMatrix m1 = pauli_matrix(o1);
    const ComplexMatrix m2 = pauli_matrix(o2);

    const double ov = overlap_test(a, b, kExact, rng);
    worst_trace = std::max(worst_trace, std::abs(ov - (a.mat() * b.mat()).trace().real()));
    worst_circuit = std::max(worst_circuit, std::abs(ov - circuit_re(a, b, swap)));

    const Complex t1 = (a.mat() * m1 * b.mat()).trace();
    const double r1 = ctrl_o_test(a, b, o1, Part::Re, kExact, rng);
    const double i1 = ctrl_o_test(a, b, o1, Part::Im, kExact, rng);
    worst_trace = std::max({worst_trace, std::abs(r1 - t1.real()), std::abs(i1 - t1.imag())});
    const ComplexMatrix v1 = on_a(o1, d) * swap;
    worst_circuit = std::max({worst_circuit, std::abs(r1 - circuit_re(a, b, v1)), std::abs(i1 - circuit_im(a, b, v1))});

    const Complex t2 = (a.mat() * m1 * b.mat() * m2).trace();
    const double r2 = ctrl_o1_o2_test(a, b, o1, o2, Part::Re, kExact, rng);
    const double i2 = ctrl_o1_o2_test(a, b, o1, o2, Part::Im, kExact, rng);
    worst_trace = std::max({worst_trace, std::abs(r2 - t2.real()), std::abs(i2 - t2.imag())});
    const ComplexMatrix v2 = on_a(o1, d) * on_b(o2, d) * swap;
    worst_circuit = std::max({worst_circuit, std::abs(r2 - circuit_re(a, b, v2)), std::abs(i2 - circuit_im(a, b, v2))});
  }
  CHECK(worst_trace < 1e-12);
  CHECK(worst_circuit < 1e-12);
}

TEST_CASE("finite-shot estimates stay in range and are unbiased") {
  Rng rng(4);
  const auto a = testing::random_density(1, rng);
  const auto b = testing::random_density(1, rng);
  const auto o = PauliString::parse("Y");
  const double exact_ov = overlap_test(a, b, kExact, rng);
  const double exact_o = ctrl_o_test(a, b, o, Part::Im, kExact, rng);
  const ShotConfig cfg{1000, 0};
  double sum_ov = 0.0;
  double sum_o = 0.0;
  const int seeds = 200;
  for (int s = 0; s < seeds; ++s) {
    Rng r(static_cast<std::uint64_t>(1000 + s));
    const double ov = overlap_test(a, b, cfg, r);
    REQUIRE(ov >= -1.0);
    REQUIRE(ov <= 1.0);
    sum_ov += ov;
    sum_o += ctrl_o_test(a, b, o, Part::Im, cfg, r);
  }
  // One estimate is 2 k / shots - 1 with k binomial.
  auto sigma = [&](double v) {
    const double p = 0.5 + 0.5 * v;
    return 2.0 * std::sqrt(p * (1.0 - p) / 1000.0);
  };
  CHECK(std::abs(sum_ov / seeds - exact_ov) < 5 * sigma(exact_ov) / std::sqrt(seeds));
  CHECK(std::abs(sum_o / seeds - exact_o) < 5 * sigma(-exact_o) / std::sqrt(seeds));
}

TEST_CASE("exact-shot assembly equals the dense backend") {
  Rng rng(5);
  struct Case {
    LindbladModel m;
    NetworkTopology topo;
  };
  const std::vector<Case> cases{
      {build_single_site(0.0, 1.0), NetworkTopology({2, 1})},
      {build_single_site(0.5, 0.7), NetworkTopology({2, 1})},
      {build_ising1d(2, 1.0, 0.8, 1.0, false), NetworkTopology({2, 2})},
      {build_ising1d(3, 1.0, 0.6, 1.0, true), NetworkTopology({2, 2, 3})},
  };
  for (const auto& c : cases) {
    const auto params = testing::random_params(c.topo, rng);
    const auto exact = assemble_exact(c.m, c.topo, params);
    const auto shots = assemble_shots(c.m, c.topo, params, kExact, rng);
    CHECK((exact.s - shots.s).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((exact.f - shots.f).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("exact-shot force vanishes for a parameter with no effect") {
  // On a 2 -> 1 map the last input-qubit rotations are traced away.
  Rng rng(6);
  const auto m = build_single_site(0.3, 1.0);
  const NetworkTopology topo({2, 1}, Connectivity::LocalModulo, Tying::Untied);
  const auto sys = assemble_shots(m, topo, testing::random_params(topo, rng), kExact, rng);
  for (int idx : {27, 28, 29, 30, 31, 32}) {
    CHECK(std::abs(sys.f(idx)) < 1e-12);
    CHECK(sys.s.row(idx).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("finite-shot assembly is within sampling error of exact") {
  Rng prng(7);
  const auto m = build_single_site(0.0, 1.0);
  const NetworkTopology topo({2, 1});
  const auto params = testing::random_params(topo, prng, 1.0);
  const auto exact = assemble_exact(m, topo, params);
  Rng rng(8);
  const auto est = assemble_shots(m, topo, params, ShotConfig{100000, 20}, rng);
  REQUIRE(est.f_stderr.size() == exact.size());
  for (Eigen::Index mu = 0; mu < exact.size(); ++mu) {
    CHECK(std::abs(est.f(mu) - exact.f(mu)) <= 5 * est.f_stderr(mu) + 1e-12);
    for (Eigen::Index nu = 0; nu < exact.size(); ++nu) {
      CHECK(std::abs(est.s(mu, nu) - exact.s(mu, nu)) <= 5 * est.s_stderr(mu, nu) + 1e-12);
    }
  }
}
