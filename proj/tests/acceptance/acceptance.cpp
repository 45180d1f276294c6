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

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero if any fails. Pass criterion ids (AC1, AC1s, AC2, ...) to run a
// subset.

#include "dqnn/ed_oracle.hpp"
#include "dqnn/experiment.hpp"
#include "dqnn/mcmc.hpp"
#include "dqnn/shotsim.hpp"
#include "dqnn/sr_solver.hpp"
#include "test_support.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>

using namespace dqnn;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;
};

fs::path g_work;

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2e", x);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json load_doc(const std::string& name) {
  return json::parse(slurp(fs::path(DQNN_CONFIG_DIR) / name), nullptr, true, true);
}

// Runs one point of a config document into a fresh directory.
PointOutcome run_doc(json doc, const std::string& tag) {
  doc.erase("sweep");
  const ExperimentConfig cfg = config_from_json(std::move(doc));
  const fs::path dir = g_work / tag;
  fs::remove_all(dir);
  return run_point(cfg, dir, true);
}

double worst_relative(const json& summary, std::string* text) {
  double worst = 0.0;
  for (const auto& [name, v] : summary["relative_error"].items()) {
    worst = std::max(worst, v.get<double>());
    *text += " " + name + "=" + sci(v.get<double>());
  }
  return worst;
}

ElementAccessor accessor(const ComplexMatrix& rho) {
  return [rho](std::uint64_t l, std::uint64_t r) {
    return rho(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(r));
  };
}

// Steady-state accuracy over the configured field values.
Verdict steady_sweep(const std::string& file, const std::string& tag, double time_limit_s) {
  const auto t0 = std::chrono::steady_clock::now();
  json doc = load_doc(file);
  const json values = doc["sweep"]["values"];
  Verdict v;
  for (const auto& h : values) {
    doc["model"]["h"] = h;
    const auto out = run_doc(doc, tag + "_h" + format_double(h.get<double>()));
    std::string errs;
    const double worst = worst_relative(out.summary, &errs);
    const double dl = out.summary["deltaL_abs"].get<double>();
    const bool ok = !out.aborted && out.converged && worst < 1e-2;
    v.pass = v.pass && ok;
    v.detail += " [h=" + format_double(h.get<double>()) + (ok ? " ok" : " FAIL") + errs + " |dL|=" + sci(dl) + "]";
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  v.detail += " time=" + std::to_string(static_cast<int>(secs)) + "s";
  if (time_limit_s > 0 && secs >= time_limit_s) {
    v.pass = false;
    v.detail += " (limit " + std::to_string(static_cast<int>(time_limit_s)) + "s)";
  }
  v.detail = "relative error < 1e-2 on every observable" + v.detail;
  return v;
}

Verdict ac1() { return steady_sweep("ising_n5_accuracy.json", "ac1", 0.0); }
Verdict ac1_smoke() { return steady_sweep("ising_n3_smoke.json", "ac1s", 60.0); }

Verdict ac2() {
  const auto out = run_doc(load_doc("j1j2_2x2_steady.json"), "ac2");
  std::string errs;
  const double worst = worst_relative(out.summary, &errs);
  const double dl = out.summary["deltaL_abs"].get<double>();
  const int steps = out.summary["steps_run"].get<int>();
  Verdict v;
  v.pass = !out.aborted && steps <= 2000 && dl < 1e-2 && worst < 1e-2;
  v.detail = "after " + std::to_string(steps) + " iterations |dL|=" + sci(dl) + " (tol 1e-2), relative" + errs +
             " (tol 1e-2)";
  return v;
}

Verdict ac3() {
  json doc = load_doc("n3_dynamics.json");
  const auto clean = run_doc(doc, "ac3");
  const double dev = clean.summary["rk4_max_abs_deviation"]["sz_mean"].get<double>();
  const double t_end = clean.summary["steps_run"].get<int>() * clean.summary["config"]["solver"]["dt"].get<double>();
  doc["solver"]["noise_eps"] = 0.01;
  const auto noisy = run_doc(doc, "ac3_noisy");
  const double dl = noisy.summary["deltaL_abs"].get<double>();
  Verdict v;
  v.pass = !clean.aborted && !noisy.aborted && t_end >= 4.0 - 1e-12 && dev < 0.05 && dl < 1e-1;
  v.detail = "max |sz - rk4| on [0," + format_double(t_end) + "] = " + sci(dev) + " (tol 0.05); noisy final |dL|=" +
             sci(dl) + " (tol 0.1)";
  return v;
}

Verdict ac4() {
  Rng rng(401);
  Verdict v;
  double worst = 0.0;
  int checked = 0;
  for (Tying tying : {Tying::TiedPerLayer, Tying::Untied}) {
    const NetworkTopology topo({2, 2, 3}, Connectivity::LocalModulo, tying);
    const ParamVector params = testing::random_params(topo, rng);
    const double h = 1e-5;
    for (int idx = 0; idx < topo.n_params(); ++idx) {
      auto at = [&](double shift) {
        ParamVector p = params;
        p(idx) += shift;
        return feedforward(topo, p).mat();
      };
      const ComplexMatrix fd = (at(-2 * h) - 8.0 * at(-h) + 8.0 * at(h) - at(2 * h)) / (12.0 * h);
      const double err = (parameter_shift_derivative(topo, params, idx) - fd).cwiseAbs().maxCoeff();
      worst = std::max(worst, err);
      if (!(err < 1e-7)) v.pass = false;
      ++checked;
    }
  }
  v.detail = "max |shift - fd| = " + sci(worst) + " over " + std::to_string(checked) +
             " parameters, tied and untied (tol 1e-7)";
  return v;
}

Verdict ac5() {
  const auto m = build_single_site(0.0, 1.0);
  const NetworkTopology topo({2, 1});
  Rng prng(501);
  const ParamVector params = testing::random_params(topo, prng, 1.0);
  const SrSystem exact = assemble_exact(m, topo, params);

  int bad = 0;
  double worst_z = 0.0;
  auto compare = [&](const SrSystem& est) {
    for (Eigen::Index mu = 0; mu < exact.size(); ++mu) {
      const double df = std::abs(est.f(mu) - exact.f(mu));
      if (df > 5 * est.f_stderr(mu) + 1e-12) ++bad;
      if (est.f_stderr(mu) > 0) worst_z = std::max(worst_z, df / est.f_stderr(mu));
      for (Eigen::Index nu = 0; nu < exact.size(); ++nu) {
        const double ds = std::abs(est.s(mu, nu) - exact.s(mu, nu));
        if (ds > 5 * est.s_stderr(mu, nu) + 1e-12) ++bad;
        if (est.s_stderr(mu, nu) > 0) worst_z = std::max(worst_z, ds / est.s_stderr(mu, nu));
      }
    }
  };
  McmcOptions mc;
  mc.n_samples = 50000;
  mc.n_batches = 20;
  Rng r1(502);
  compare(estimate_sr(m, topo, params, mc, r1));
  Rng r2(503);
  compare(assemble_shots(m, topo, params, ShotConfig{100000, 20}, r2));

  double worst_exact = 0.0;
  Rng r3(504);
  for (const auto& [model, layers] : std::vector<std::pair<LindbladModel, std::vector<int>>>{
           {m, {2, 1}}, {build_ising1d(3, 1.0, 0.6, 1.0, true), {2, 2, 3}}}) {
    const NetworkTopology t(layers);
    const ParamVector p = testing::random_params(t, r3);
    const SrSystem a = assemble_exact(model, t, p);
    const SrSystem b = assemble_shots(model, t, p, ShotConfig{}, r3);
    worst_exact = std::max({worst_exact, (a.s - b.s).cwiseAbs().maxCoeff(), (a.f - b.f).cwiseAbs().maxCoeff()});
  }
  Verdict v;
  v.pass = bad == 0 && worst_exact < 1e-10;
  v.detail = std::to_string(bad) + " entries outside 5 stderr (worst " + format_double(std::round(worst_z * 100) / 100) +
             " stderr); exact-shot vs dense " + sci(worst_exact) + " (tol 1e-10)";
  return v;
}

Verdict ac6() {
  const auto geo = ChainGeometry::open_chain(1);
  const auto rho = accessor(DensityMatrix::maximally_mixed(1).mat());
  const auto obs = named_observable("sz_mean", 1);
  const std::vector<long> ns{1000, 10000, 100000};
  const int seeds = 20;
  std::vector<double> lx, ly;
  for (long n : ns) {
    double sum = 0.0;
    for (int s = 0; s < seeds; ++s) {
      Rng rng(static_cast<std::uint64_t>(600 + s) * 7919u + static_cast<std::uint64_t>(n));
      ObservableSampling opts;
      opts.n_samples = n;
      sum += estimate_observable(rho, obs, geo, opts, rng).std_error;
    }
    lx.push_back(std::log(static_cast<double>(n)));
    ly.push_back(std::log(sum / seeds));
  }
  const double mx = (lx[0] + lx[1] + lx[2]) / 3.0;
  const double my = (ly[0] + ly[1] + ly[2]) / 3.0;
  double num = 0.0, den = 0.0;
  for (int i = 0; i < 3; ++i) {
    num += (lx[i] - mx) * (ly[i] - my);
    den += (lx[i] - mx) * (lx[i] - mx);
  }
  const double slope = num / den;
  Verdict v;
  v.pass = std::abs(slope + 0.5) <= 0.1;
  v.detail = "fitted exponent " + format_double(std::round(slope * 1e4) / 1e4) + " (want -0.5 +- 0.1)";
  return v;
}

Verdict ac7() {
  Rng rng(701);
  const ShotConfig exact{};
  double worst_trace = 0.0;
  double worst_circuit = 0.0;
  auto circuit = [](const DensityMatrix& a, const DensityMatrix& b, const ComplexMatrix& u, bool im) {
    return im ? 1.0 - 2.0 * testing::ancilla_circuit_p0(a.mat(), b.mat(), u, std::numbers::pi / 2)
              : 2.0 * testing::ancilla_circuit_p0(a.mat(), b.mat(), u, 0.0) - 1.0;
  };
  auto track = [](double& w, double x) { w = std::max(w, std::abs(x)); };
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + trial % 2;
    const auto d = dim_for_qubits(n);
    const auto a = testing::random_density(n, rng);
    const auto b = testing::random_density(n, rng);
    const auto o1 = testing::random_pauli(n, rng);
    const auto o2 = testing::random_pauli(n, rng);
    const ComplexMatrix swap = testing::swap_registers(n);
    const ComplexMatrix idd = ComplexMatrix::Identity(d, d);
    const ComplexMatrix m1 = pauli_matrix(o1);
    const ComplexMatrix m2 = pauli_matrix(o2);

    const double ov = overlap_test(a, b, exact, rng);
    track(worst_trace, ov - (a.mat() * b.mat()).trace().real());
    track(worst_circuit, ov - circuit(a, b, swap, false));

    const Complex t1 = (a.mat() * m1 * b.mat()).trace();
    const ComplexMatrix v1 = tensor_product(m1, idd) * swap;
    for (bool im : {false, true}) {
      const double got = ctrl_o_test(a, b, o1, im ? Part::Im : Part::Re, exact, rng);
      track(worst_trace, got - (im ? t1.imag() : t1.real()));
      track(worst_circuit, got - circuit(a, b, v1, im));
    }

    const Complex t2 = (a.mat() * m1 * b.mat() * m2).trace();
    const ComplexMatrix v2 = tensor_product(m1, idd) * tensor_product(idd, m2) * swap;
    for (bool im : {false, true}) {
      const double got = ctrl_o1_o2_test(a, b, o1, o2, im ? Part::Im : Part::Re, exact, rng);
      track(worst_trace, got - (im ? t2.imag() : t2.real()));
      track(worst_circuit, got - circuit(a, b, v2, im));
    }
  }
  Verdict v;
  v.pass = worst_trace < 1e-12 && worst_circuit < 1e-12;
  v.detail = "100 instances per test: vs dense trace " + sci(worst_trace) + ", vs ancilla circuit " +
             sci(worst_circuit) + " (tol 1e-12)";
  return v;
}

Verdict ac8() {
  Rng rng(801);
  const NetworkTopology topo({2, 2, 3, 3, 5});
  double herm = 0.0, tr = 0.0, mineig = 1.0;
  for (int i = 0; i < 1000; ++i) {
    const DensityMatrix rho = feedforward(topo, testing::random_params(topo, rng));
    herm = std::max(herm, rho.hermiticity_error());
    tr = std::max(tr, rho.trace_error());
    mineig = std::min(mineig, rho.min_eigenvalue());
  }
  Verdict v;
  v.pass = herm <= 1e-12 && tr <= 1e-12 && mineig >= -1e-10;
  v.detail = "1000 states: hermiticity " + sci(herm) + ", trace " + sci(tr) + ", min eigenvalue " + sci(mineig);
  return v;
}

Verdict ac9() {
  const auto m = build_single_site(0.0, 1.0);
  const double dt = 1e-3;
  const auto traj = evolve_rk4(m, DensityMatrix::basis_state(1, 0), dt, 5000);
  double worst = 0.0;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const double t = dt * static_cast<double>(k);
    worst = std::max(worst, std::abs(expectation(traj[k], PauliString::parse("Z")) - (2.0 * std::exp(-t) - 1.0)));
  }
  std::vector<LindbladModel> models{build_single_site(0.0, 1.0), build_single_site(0.8, 0.5),
                                    build_ising1d(3, 1.0, 0.6, 1.0, true),
                                    build_j1j2_2d(2, 2, 1.0, 0.5, 1.0, 1.0, true)};
  for (double h : {0.2, 0.6, 1.0, 1.4}) models.push_back(build_ising1d(5, 1.0, h, 1.0, true));
  double residual = 0.0;
  for (const auto& model : models) {
    const DensityMatrix ss = steady_state(model);
    residual = std::max(residual, apply_liouvillian(model, ss.mat()).cwiseAbs().maxCoeff());
  }
  Verdict v;
  v.pass = worst < 1e-8 && residual <= 1e-10;
  v.detail = "decay on [0,5] max error " + sci(worst) + " (tol 1e-8); steady residual over " +
             std::to_string(models.size()) + " models " + sci(residual) + " (tol 1e-10)";
  return v;
}

Verdict ac10() {
  struct Case {
    std::string file;
    json overrides;
  };
  const std::vector<Case> cases{
      {"ising_n5_accuracy.json", {{"model", {{"h", 0.6}}}, {"solver", {{"max_steps", 60}}}}},
      {"ising_n3_smoke.json", {{"model", {{"h", 1.0}}}, {"solver", {{"max_steps", 300}}}}},
      {"j1j2_2x2_steady.json", {{"solver", {{"max_steps", 100}}}}},
      {"n3_dynamics.json", {{"solver", {{"noise_eps", 0.01}}}}},
      {"n3_steady.json", {{"solver", {{"backend", "mcmc"}, {"max_steps", 5}, {"mcmc_samples", 4000}}}}},
      {"n3_steady.json", {{"solver", {{"backend", "shots"}, {"max_steps", 3}, {"shots", 500}}}}},
  };
  Verdict v;
  int same = 0;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    json doc = load_doc(cases[i].file);
    doc.merge_patch(cases[i].overrides);
    const std::string tag = "ac10_" + std::to_string(i);
    run_doc(doc, tag + "a");
    run_doc(doc, tag + "b");
    const bool eq = slurp(g_work / (tag + "a") / "trajectory.csv") == slurp(g_work / (tag + "b") / "trajectory.csv");
    if (eq) {
      ++same;
    } else {
      v.pass = false;
      v.detail += " differs: " + cases[i].file;
    }
  }
  v.detail = std::to_string(same) + "/" + std::to_string(cases.size()) +
             " configs byte-identical across reruns (exact, mcmc, shots, noisy dynamics)" + v.detail;
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"AC1s", ac1_smoke}, {"AC2", ac2}, {"AC3", ac3}, {"AC4", ac4}, {"AC5", ac5}, {"AC6", ac6},
      {"AC7", ac7},        {"AC8", ac8}, {"AC9", ac9}, {"AC10", ac10}, {"AC1", ac1},
  };
  std::set<std::string> wanted(argv + 1, argv + argc);
  g_work = fs::temp_directory_path() / ("dqnn_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(g_work);

  int failed = 0;
  for (const auto& [id, fn] : criteria) {
    if (!wanted.empty() && !wanted.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = fn();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail = std::string("threw: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!v.pass) ++failed;
    std::printf("%-5s %s  %s  (%.1fs)\n", id.c_str(), v.pass ? "PASS" : "FAIL", v.detail.c_str(), secs);
    std::fflush(stdout);
  }
  fs::remove_all(g_work);
  return failed == 0 ? 0 : 1;
}
