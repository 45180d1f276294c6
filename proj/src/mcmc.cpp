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

#include "dqnn/mcmc.hpp"

#include "dqnn/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace dqnn {

namespace {

std::uint64_t all_sites(int n) { return (std::uint64_t{1} << n) - 1; }

std::uint64_t bond_mask(const ChainGeometry& geo, Rng& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, geo.bonds.size() - 1);
  const auto [a, b] = geo.bonds[pick(rng)];
  return site_mask(geo.n_sites, a) | site_mask(geo.n_sites, b);
}

std::uint64_t site_flip(const ChainGeometry& geo, Rng& rng) {
  std::uniform_int_distribution<int> pick(0, geo.n_sites - 1);
  return site_mask(geo.n_sites, pick(rng));
}

std::uint64_t uniform_config(int n, Rng& rng) {
  std::uniform_int_distribution<std::uint64_t> pick(0, all_sites(n));
  return pick(rng);
}

template <std::size_t K>
std::size_t pick_move(std::array<double, K> w, bool has_bonds, std::size_t bond_move, Rng& rng) {
  if (!has_bonds) w[bond_move] = 0.0;
  std::discrete_distribution<std::size_t> d(w.begin(), w.end());
  return d(rng);
}

int burn_in_steps(int sweeps, int n_sites, int steps_per_sweep) {
  const int s = sweeps < 0 ? 10 * n_sites : sweeps;
  return s * steps_per_sweep;
}

std::uint64_t argmax_diagonal(const ElementAccessor& rho_elem, int n) {
  std::uint64_t best = 0;
  double best_val = -1.0;
  for (std::uint64_t l = 0; l <= all_sites(n); ++l) {
    const double v = rho_elem(l, l).real();
    if (v > best_val) {
      best_val = v;
      best = l;
    }
  }
  return best;
}

double std_error_of(const std::vector<double>& xs) {
  const double n = static_cast<double>(xs.size());
  if (xs.size() < 2) return 0.0;
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / (n - 1) / n);
}

}  // namespace

void MoveSet::validate() const {
  auto check = [](const auto& w, const char* name) {
    double total = 0.0;
    for (double x : w) {
      if (!(x >= 0.0) || !std::isfinite(x)) {
        throw std::invalid_argument(std::string(name) + " move weights must be finite and >= 0");
      }
      total += x;
    }
    if (total <= 0.0) throw std::invalid_argument(std::string(name) + " move weights are all zero");
  };
  check(pair, "pair");
  check(diag, "diagonal");
}

ChainGeometry ChainGeometry::from_model(const LindbladModel& m) { return {m.n_sites, m.nn_bonds}; }

ChainGeometry ChainGeometry::open_chain(int n) {
  ChainGeometry g{n, {}};
  for (int j = 0; j + 1 < n; ++j) g.bonds.push_back({j, j + 1});
  return g;
}

PairChainState pair_chain_step(const PairChainState& st, const ElementAccessor& rho_elem,
                               const ChainGeometry& geo, const MoveSet& moves, Rng& rng,
                               bool* accepted) {
  const int n = geo.n_sites;
  std::uint64_t l = st.l.index();
  std::uint64_t r = st.r.index();
  std::bernoulli_distribution coin(0.5);
  switch (pick_move(moves.pair, !geo.bonds.empty(), 2, rng)) {
    case 0: {
      const auto m = site_flip(geo, rng);
      l ^= m;
      r ^= m;
      break;
    }
    case 1: {
      const auto m = site_flip(geo, rng);
      (coin(rng) ? l : r) ^= m;
      break;
    }
    case 2: {
      const auto m = bond_mask(geo, rng);
      (coin(rng) ? l : r) ^= m;
      break;
    }
    case 3:
      l ^= all_sites(n);
      r ^= all_sites(n);
      break;
    default:
      l = uniform_config(n, rng);
      r = uniform_config(n, rng);
      break;
  }
  const Complex amp = rho_elem(l, r);
  const double ratio = std::norm(amp) / std::norm(st.amp);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const bool ok = std::norm(amp) > 0.0 && u(rng) < ratio;
  if (accepted) *accepted = ok;
  if (!ok) return st;
  return {SpinConfig(n, l), SpinConfig(n, r), amp};
}

SpinConfig diag_chain_step(const SpinConfig& st, const ElementAccessor& rho_elem,
                           const ChainGeometry& geo, const MoveSet& moves, Rng& rng,
                           bool* accepted) {
  const int n = geo.n_sites;
  std::uint64_t l = st.index();
  switch (pick_move(moves.diag, !geo.bonds.empty(), 1, rng)) {
    case 0: l ^= site_flip(geo, rng); break;
    case 1: l ^= bond_mask(geo, rng); break;
    case 2: l ^= all_sites(n); break;
    default: l = uniform_config(n, rng); break;
  }
  const double w_old = rho_elem(st.index(), st.index()).real();
  const double w_new = rho_elem(l, l).real();
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const bool ok = w_new > 0.0 && u(rng) < w_new / w_old;
  if (accepted) *accepted = ok;
  return ok ? SpinConfig(n, l) : st;
}

Estimate estimate_observable(const ElementAccessor& rho_elem, const Observable& obs,
                             const ChainGeometry& geo, const ObservableSampling& opts, Rng& rng) {
  opts.moves.validate();
  for (const auto& t : obs.terms) {
    if (t.n_qubits() != geo.n_sites) throw DimensionError("observable does not span the lattice");
    if (t.weight() > 2) {
      throw std::invalid_argument("non-local observable term " + t.to_string() +
                                  " acts on more than two sites");
    }
  }
  if (opts.n_samples < opts.n_batches || opts.n_batches < 1) {
    throw std::invalid_argument("need at least one sample per batch");
  }
  const int n = geo.n_sites;
  SpinConfig st(n, argmax_diagonal(rho_elem, n));
  if (rho_elem(st.index(), st.index()).real() <= 0.0) {
    throw ZeroWeightError("density matrix has no positive diagonal element");
  }
  const int burn = burn_in_steps(opts.burn_in_sweeps, n, n);
  for (int i = 0; i < burn; ++i) st = diag_chain_step(st, rho_elem, geo, opts.moves, rng);

  const long per_batch = opts.n_samples / opts.n_batches;
  std::vector<double> batch_means;
  double total = 0.0;
  long count = 0;
  for (int b = 0; b < opts.n_batches; ++b) {
    double acc = 0.0;
    for (long s = 0; s < per_batch; ++s) {
      st = diag_chain_step(st, rho_elem, geo, opts.moves, rng);
      const std::uint64_t l = st.index();
      const Complex rll = rho_elem(l, l);
      Complex v = 0.0;
      for (const auto& t : obs.terms) {
        const std::uint64_t m = l ^ t.flip_mask();
        v += t.apply_to_basis(m).second * rho_elem(m, l);
      }
      acc += (v / rll).real();
    }
    batch_means.push_back(acc / static_cast<double>(per_batch));
    total += acc;
    count += per_batch;
  }
  return {total / static_cast<double>(count), std_error_of(batch_means)};
}

SrSystem estimate_sr(const LindbladModel& m, const ComplexMatrix& rho,
                     const std::vector<ComplexMatrix>& derivs, const McmcOptions& opts, Rng& rng) {
  opts.moves.validate();
  const int n = m.n_sites;
  const auto d = dim_for_qubits(n);
  if (rho.rows() != d || rho.cols() != d) throw DimensionError("rho does not match the model");
  for (const auto& dm : derivs) {
    if (dm.rows() != d || dm.cols() != d) throw DimensionError("derivative does not match the model");
  }
  if (opts.n_samples < 1) throw std::invalid_argument("n_samples must be positive");
  if (opts.n_batches == 1 || opts.n_batches > opts.n_samples) {
    throw std::invalid_argument("n_batches must be 0 or in [2, n_samples]");
  }
  const auto p = static_cast<Eigen::Index>(derivs.size());
  const ChainGeometry geo = ChainGeometry::from_model(m);
  const ElementAccessor elem = [&rho](std::uint64_t a, std::uint64_t b) {
    return rho(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
  };

  const std::uint64_t start = argmax_diagonal(elem, n);
  PairChainState st{SpinConfig(n, start), SpinConfig(n, start), elem(start, start)};
  if (std::norm(st.amp) == 0.0) throw ZeroWeightError("density matrix has no nonzero diagonal");
  long accepted_total = 0;
  bool acc = false;
  const int burn = burn_in_steps(opts.burn_in_sweeps, n, 2 * n);
  // Proposals that land on the current pair do not count as movement.
  auto moved = [](const PairChainState& a, const PairChainState& b) {
    return a.l.index() != b.l.index() || a.r.index() != b.r.index();
  };
  for (int i = 0; i < burn; ++i) {
    const PairChainState prev = st;
    st = pair_chain_step(st, elem, geo, opts.moves, rng, &acc);
    accepted_total += acc && moved(prev, st);
  }
  std::vector<std::uint64_t> keys(static_cast<std::size_t>(opts.n_samples));
  const auto ud = static_cast<std::uint64_t>(d);
  for (auto& k : keys) {
    const PairChainState prev = st;
    st = pair_chain_step(st, elem, geo, opts.moves, rng, &acc);
    accepted_total += acc && moved(prev, st);
    k = st.l.index() * ud + st.r.index();
  }
  if (accepted_total == 0) {
    throw ChainStuckError("pair chain never left its starting pair; the density matrix is degenerate");
  }

  // Distinct visited pairs and the estimators on them.
  std::vector<std::uint64_t> uniq = keys;
  std::sort(uniq.begin(), uniq.end());
  uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
  const auto k_count = static_cast<Eigen::Index>(uniq.size());
  ComplexMatrix o(k_count, p);
  ComplexVector e(k_count);
  for (Eigen::Index k = 0; k < k_count; ++k) {
    const std::uint64_t l = uniq[static_cast<std::size_t>(k)] / ud;
    const std::uint64_t r = uniq[static_cast<std::size_t>(k)] % ud;
    const Complex a = elem(l, r);
    for (Eigen::Index mu = 0; mu < p; ++mu) {
      o(k, mu) = derivs[static_cast<std::size_t>(mu)](static_cast<Eigen::Index>(l),
                                                      static_cast<Eigen::Index>(r)) / a;
    }
    e(k) = local_estimator(m, rho, l, r);
  }
  std::vector<Eigen::Index> slot(keys.size());
  for (std::size_t i = 0; i < keys.size(); ++i) {
    slot[i] = std::lower_bound(uniq.begin(), uniq.end(), keys[i]) - uniq.begin();
  }

  auto system_from = [&](std::size_t begin, std::size_t end) {
    RealVector w = RealVector::Zero(k_count);
    for (std::size_t i = begin; i < end; ++i) w(slot[i]) += 1.0;
    w /= static_cast<double>(end - begin);
    const ComplexVector mean_o = o.transpose() * w.cast<Complex>();
    const Complex mean_e = (w.cast<Complex>().array() * e.array()).sum();
    const ComplexMatrix wo = w.cast<Complex>().asDiagonal() * o;
    SrSystem sys;
    sys.s = (o.adjoint() * wo - mean_o.conjugate() * mean_o.transpose()).real();
    sys.s = 0.5 * (sys.s + sys.s.transpose()).eval();
    sys.f = (wo.adjoint() * e - mean_o.conjugate() * mean_e).real();
    return sys;
  };

  SrSystem out = system_from(0, keys.size());
  if (opts.n_batches > 1) {
    const std::size_t per = keys.size() / static_cast<std::size_t>(opts.n_batches);
    const auto b_count = static_cast<std::size_t>(opts.n_batches);
    std::vector<SrSystem> batches;
    for (std::size_t b = 0; b < b_count; ++b) batches.push_back(system_from(b * per, (b + 1) * per));
    out.s_stderr = RealMatrix::Zero(p, p);
    out.f_stderr = RealVector::Zero(p);
    std::vector<double> xs(b_count);
    for (Eigen::Index mu = 0; mu < p; ++mu) {
      for (std::size_t b = 0; b < b_count; ++b) xs[b] = batches[b].f(mu);
      out.f_stderr(mu) = std_error_of(xs);
      for (Eigen::Index nu = 0; nu < p; ++nu) {
        for (std::size_t b = 0; b < b_count; ++b) xs[b] = batches[b].s(mu, nu);
        out.s_stderr(mu, nu) = std_error_of(xs);
      }
    }
  }
  return out;
}

SrSystem estimate_sr(const LindbladModel& m, const NetworkTopology& topo,
                     const ParamVector& params, const McmcOptions& opts, Rng& rng) {
  if (topo.n_outputs() != m.n_sites) throw DimensionError("network output does not match the model");
  const NetworkEvaluation ev(topo, params);
  return estimate_sr(m, ev.rho(), ev.derivatives(), opts, rng);
}

}  // namespace dqnn
