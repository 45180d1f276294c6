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

#include "dqnn/sr_solver.hpp"

#include "dqnn/errors.hpp"

#include <cmath>
#include <limits>

namespace dqnn {

namespace {

Eigen::Map<const ComplexVector> as_vector(const ComplexMatrix& m) {
  return Eigen::Map<const ComplexVector>(m.data(), m.size());
}

bool all_finite(const SrSystem& sys) { return sys.s.allFinite() && sys.f.allFinite(); }

}  // namespace

void SolverConfig::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument(what); };
  if (!(lr0 > 0.0)) fail("lr0 must be > 0");
  if (!(lr_decay > 0.0 && lr_decay <= 1.0)) fail("lr_decay must be in (0, 1]");
  if (mode == Mode::Dynamics && !(dt > 0.0)) fail("dt must be > 0 in dynamics mode");
  if (max_steps < 0) fail("max_steps must be >= 0");
  if (!(tikhonov_eps >= 0.0)) fail("tikhonov_eps must be >= 0");
  if (!(noise_eps >= 0.0)) fail("noise_eps must be >= 0");
  if (!(convergence_tol > 0.0)) fail("convergence_tol must be > 0");
  if (!(init_scale >= 0.0)) fail("init_scale must be >= 0");
  if (backend == Backend::Shots && noise_eps > 0.0 && noise_target == NoiseTarget::Derivatives) {
    fail("the shots backend has no derivative matrices; use noise_target = sr_entries");
  }
  if (backend == Backend::Shots && shots.shots < 0) fail("shots must be >= 0");
  if (backend == Backend::Mcmc) {
    if (mcmc.n_samples < 1) fail("mcmc samples must be >= 1");
    mcmc.moves.validate();
  }
}

SrSystem assemble_dense(const ComplexMatrix& rho, const std::vector<ComplexMatrix>& derivs,
                        const ComplexMatrix& l_rho) {
  const double norm = std::sqrt(hs_inner(rho, rho).real());
  if (!(norm > 0.0)) throw ZeroWeightError("density matrix has zero norm");
  const auto p = static_cast<Eigen::Index>(derivs.size());
  const auto len = rho.size();
  const ComplexVector rho_hat = as_vector(rho) / norm;
  ComplexMatrix g(len, p);
  for (Eigen::Index mu = 0; mu < p; ++mu) {
    const auto& dm = derivs[static_cast<std::size_t>(mu)];
    if (dm.rows() != rho.rows() || dm.cols() != rho.cols()) {
      throw DimensionError("derivative " + std::to_string(mu) + " has the wrong shape");
    }
    const ComplexVector d = as_vector(dm) / norm;
    const double a = rho_hat.dot(d).real();
    g.col(mu) = d - a * rho_hat;
  }
  const ComplexVector l_hat = as_vector(l_rho) / norm;
  const ComplexVector b = g.adjoint() * rho_hat;  // <d_mu, rho>
  const Complex rho_l = rho_hat.dot(l_hat);       // <rho, L rho>

  SrSystem sys;
  // Re<u, v> is the real dot product of the interleaved (re, im) storage.
  const Eigen::Map<const RealMatrix> g_re(reinterpret_cast<const double*>(g.data()), 2 * len, p);
  sys.s.noalias() = g_re.transpose() * g_re;
  sys.s -= (b * b.adjoint()).real();
  sys.s = 0.5 * (sys.s + sys.s.transpose()).eval();
  sys.f = (g.adjoint() * l_hat).real() - (b * rho_l).real();
  return sys;
}

SrSystem assemble_exact(const LindbladModel& m, const NetworkTopology& topo,
                        const ParamVector& params) {
  if (topo.n_outputs() != m.n_sites) throw DimensionError("network output does not match the model");
  const NetworkEvaluation ev(topo, params);
  return assemble_dense(ev.rho(), ev.derivatives(), apply_liouvillian(m, ev.rho()));
}

void inject_noise(std::vector<ComplexMatrix>& derivs, double eps, Rng& rng) {
  if (eps < 0.0) throw std::invalid_argument("noise strength must be >= 0");
  if (eps == 0.0) return;
  std::normal_distribution<double> noise(0.0, eps);
  for (auto& d : derivs) {
    for (Eigen::Index c = 0; c < d.cols(); ++c) {
      for (Eigen::Index r = 0; r < d.rows(); ++r) {
        const double re = noise(rng);
        const double im = noise(rng);
        d(r, c) += Complex(re, im);
      }
    }
  }
}

void inject_noise(SrSystem& sys, double eps, Rng& rng) {
  if (eps < 0.0) throw std::invalid_argument("noise strength must be >= 0");
  if (eps == 0.0) return;
  std::normal_distribution<double> noise(0.0, eps);
  const auto p = sys.size();
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = i; j < p; ++j) {
      const double x = noise(rng);
      sys.s(i, j) += x;
      if (i != j) sys.s(j, i) += x;
    }
  }
  for (Eigen::Index i = 0; i < p; ++i) sys.f(i) += noise(rng);
}

UpdateResult solve_update(const SrSystem& sys, double lr, double eps) {
  if (!all_finite(sys)) throw NonFiniteError("S or f contains non-finite entries");
  if (eps < 0.0) throw std::invalid_argument("regularization must be >= 0");
  const auto p = sys.size();
  if (sys.s.rows() != p || sys.s.cols() != p) throw DimensionError("S and f sizes differ");
  UpdateResult out{RealVector::Zero(p), 0.0, false};
  if (p == 0) return out;

  const RealMatrix a = sys.s + eps * RealMatrix::Identity(p, p);
  Eigen::LDLT<RealMatrix> ldlt(a);
  bool ok = ldlt.info() == Eigen::Success && ldlt.rcond() > 1e3 * std::numeric_limits<double>::epsilon();
  if (ok) {
    out.delta = lr * ldlt.solve(sys.f);
    ok = out.delta.allFinite();
  }
  if (!ok) {
    Eigen::SelfAdjointEigenSolver<RealMatrix> es(a);
    const RealVector& ev = es.eigenvalues();
    const double cutoff = 1e-10 * ev.cwiseAbs().maxCoeff();
    const RealVector proj = es.eigenvectors().transpose() * sys.f;
    RealVector scaled = RealVector::Zero(p);
    for (Eigen::Index i = 0; i < p; ++i) {
      if (std::abs(ev(i)) > cutoff) scaled(i) = proj(i) / ev(i);
    }
    out.delta = lr * (es.eigenvectors() * scaled);
    out.pinv_fallback = true;
  }
  out.residual = (sys.s * (out.delta / lr) - sys.f).norm();
  return out;
}

Complex delta_L(const LindbladModel& m, const ComplexMatrix& rho) {
  const Complex norm = hs_inner(rho, rho);
  if (norm == 0.0) throw ZeroWeightError("density matrix has zero norm");
  return hs_inner(rho, apply_liouvillian(m, rho)) / norm;
}

Complex delta_L(const LindbladModel& m, const DensityMatrix& rho) { return delta_L(m, rho.mat()); }

ParamVector initial_params(const NetworkTopology& topo, std::uint64_t seed, double scale) {
  Rng rng = stream(seed, "init");
  std::uniform_real_distribution<double> u(-scale, scale);
  ParamVector theta(topo.n_params());
  for (Eigen::Index i = 0; i < theta.size(); ++i) theta(i) = scale == 0.0 ? 0.0 : u(rng);
  return theta;
}

RunResult run(const SolverConfig& cfg, const LindbladModel& m, const NetworkTopology& topo,
              const std::vector<Observable>& observables, const RecordCallback& on_record) {
  cfg.validate();
  m.validate();
  if (topo.n_outputs() != m.n_sites) {
    throw DimensionError("network output layer has " + std::to_string(topo.n_outputs()) +
                         " qubits, model has " + std::to_string(m.n_sites) + " sites");
  }
  Rng noise_rng = stream(cfg.seed, "noise");
  Rng backend_rng = stream(cfg.seed, "backend");

  RunResult res;
  res.params = initial_params(topo, cfg.seed, cfg.init_scale);
  const bool steady = cfg.mode == Mode::SteadyState;
  double lr = steady ? cfg.lr0 : cfg.dt;

  for (int step = 0; step <= cfg.max_steps; ++step) {
    SrSystem sys;
    ComplexMatrix rho;
    if (cfg.backend == Backend::Shots) {
      rho = feedforward(topo, res.params).mat();
      sys = assemble_shots(m, topo, res.params, cfg.shots, backend_rng);
    } else {
      const NetworkEvaluation ev(topo, res.params);
      rho = ev.rho();
      auto derivs = ev.derivatives();
      if (cfg.noise_target == NoiseTarget::Derivatives) inject_noise(derivs, cfg.noise_eps, noise_rng);
      sys = cfg.backend == Backend::Exact
                ? assemble_dense(rho, derivs, apply_liouvillian(m, rho))
                : estimate_sr(m, rho, derivs, cfg.mcmc, backend_rng);
    }
    if (cfg.noise_target == NoiseTarget::SrEntries) inject_noise(sys, cfg.noise_eps, noise_rng);

    TrajectoryRecord rec;
    rec.step = step;
    rec.time = steady ? std::numeric_limits<double>::quiet_NaN() : step * cfg.dt;
    const DensityMatrix state(rho);
    for (const auto& o : observables) rec.observables.push_back(expectation(state, o));
    const Complex dl = delta_L(m, rho);
    rec.deltaL_re = dl.real();
    rec.deltaL_im = dl.imag();

    UpdateResult upd;
    try {
      upd = solve_update(sys, lr, cfg.tikhonov_eps);
    } catch (const NonFiniteError& e) {
      rec.sr_residual = std::numeric_limits<double>::quiet_NaN();
      rec.pinv_fallback = false;
      res.records.push_back(rec);
      res.aborted = true;
      res.diagnostic = "step " + std::to_string(step) + ": " + e.what();
      break;
    }
    rec.sr_residual = upd.residual;
    rec.pinv_fallback = upd.pinv_fallback;
    res.records.push_back(rec);
    res.rho = rho;

    const bool below_tol = steady && cfg.stop_at_tol && std::abs(dl) < cfg.convergence_tol;
    if (on_record && !on_record(rec)) break;
    if (below_tol || step == cfg.max_steps) break;

    res.params += upd.delta;
    if (!res.params.allFinite()) {
      res.aborted = true;
      res.diagnostic = "non-finite parameters after step " + std::to_string(step);
      break;
    }
    if (steady) lr *= cfg.lr_decay;
  }

  if (!res.records.empty() && !res.aborted) {
    const auto& last = res.records.back();
    const double dl = std::hypot(last.deltaL_re, last.deltaL_im);
    res.converged = steady ? dl < cfg.convergence_tol : true;
  }
  return res;
}

}  // namespace dqnn
