#pragma once

// Modal solution of u_tt + L u = f with Dirichlet data: every eigen-coefficient
// d_m obeys a forced oscillator with frequency sqrt(lambda_m), solved exactly
// by the Duhamel kernel, and u is the truncated eigen-series.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "wavedecay/eigensolver.hpp"
#include "wavedecay/error.hpp"
#include "wavedecay/oscillator.hpp"
#include "wavedecay/parallel.hpp"
#include "wavedecay/quadrature.hpp"
#include "wavedecay/signal.hpp"

namespace wavedecay::wave {

/// f(t_k, x_i) on a time grid times the full spatial node set.
struct SpaceTimeField {
  std::vector<double> times;
  std::size_t n_nodes = 0;
  std::vector<double> values;  // row-major: values[k * n_nodes + i]

  std::span<const double> at(std::size_t k) const {
    return std::span<const double>(values).subspan(k * n_nodes, n_nodes);
  }

  template <class F>
  static SpaceTimeField sample(const Grid1D& grid, std::vector<double> times, F&& f) {
    SpaceTimeField s{std::move(times), grid.node_count(), {}};
    s.values.resize(s.times.size() * s.n_nodes);
    const auto x = grid.nodes();
    for (std::size_t k = 0; k < s.times.size(); ++k) {
      for (std::size_t i = 0; i < s.n_nodes; ++i) s.values[k * s.n_nodes + i] = f(s.times[k], x[i]);
    }
    return s;
  }

  static SpaceTimeField zero(const Grid1D& grid, std::vector<double> times) {
    SpaceTimeField s{std::move(times), grid.node_count(), {}};
    s.values.assign(s.times.size() * s.n_nodes, 0.0);
    return s;
  }
};

/// Uniform grid 0, dt, ..., T (the last step is shortened if T is not a multiple).
inline std::vector<double> uniform_times(double dt, double T) {
  detail::require(dt > 0.0 && T > 0.0, "time grid: dt and T must be > 0");
  const auto n = static_cast<std::size_t>(std::llround(T / dt));
  detail::require(n >= 1, "time grid: T shorter than one step");
  std::vector<double> t(n + 1);
  for (std::size_t k = 0; k <= n; ++k) t[k] = static_cast<double>(k) * dt;
  t.back() = T;
  return t;
}

struct WaveProblem {
  std::shared_ptr<const EigenBasis> basis;
  SpaceTimeField forcing;
  std::vector<double> g;  // initial displacement, all nodes
  std::vector<double> h;  // initial velocity, all nodes
  TailPolicy tail;

  void validate() const {
    detail::require(basis != nullptr, "wave problem: missing basis");
    const std::size_t nodes = basis->grid.node_count();
    detail::require(g.size() == nodes && h.size() == nodes, "wave problem: initial data does not match the grid");
    detail::require(forcing.n_nodes == nodes, "wave problem: forcing spatial dimension does not match the grid");
    detail::require(forcing.values.size() == forcing.times.size() * nodes, "wave problem: forcing array size");
    detail::require(forcing.times.size() >= 2 && forcing.times.front() == 0.0,
                    "wave problem: forcing time grid must start at 0");
    for (std::size_t k = 0; k + 1 < forcing.times.size(); ++k) {
      detail::require(forcing.times[k + 1] > forcing.times[k], "wave problem: forcing times not increasing");
    }
  }
};

/// f_m(t_k) = (f(t_k), phi_m) for the first M modes.
struct ModalSignal {
  std::vector<double> times;
  std::vector<std::vector<double>> coeffs;  // coeffs[m][k]
  TailPolicy tail;

  std::size_t modes() const { return coeffs.size(); }

  SampledSignal mode(std::size_t m) const { return SampledSignal(times, coeffs[m], tail); }

  /// (sum_m f_m(t_k)^2)^{1/2}
  std::vector<double> l2_norms() const {
    std::vector<double> out(times.size(), 0.0);
    for (const auto& c : coeffs)
      for (std::size_t k = 0; k < out.size(); ++k) out[k] += c[k] * c[k];
    for (double& v : out) v = std::sqrt(v);
    return out;
  }
};

struct SpectralState {
  double t = 0.0;
  std::vector<double> d;
  std::vector<double> dprime;
};

inline std::size_t default_mode_count(const EigenBasis& basis) { return std::min<std::size_t>(64, basis.count()); }

/// (field, phi_m) for m < M, mass-matrix inner product.
inline std::vector<double> project(std::span<const double> field, const EigenBasis& basis, std::size_t M) {
  detail::require(field.size() == basis.grid.node_count(), "project: field does not match the grid");
  detail::require(M <= basis.count(), "project: more modes requested than the basis holds");
  const std::size_t n = basis.grid.interior_count();
  const auto mf = basis.mass.multiply(field.subspan(1, n));
  std::vector<double> out(M);
  for (std::size_t m = 0; m < M; ++m) {
    const auto phi = basis.interior(m);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += phi[i] * mf[i];
    out[m] = s;
  }
  return out;
}

inline std::vector<double> project(std::span<const double> field, const EigenBasis& basis) {
  return project(field, basis, basis.count());
}

inline ModalSignal project_forcing(const WaveProblem& problem, std::size_t M) {
  problem.validate();
  const EigenBasis& basis = *problem.basis;
  detail::require(M <= basis.count(), "project_forcing: more modes requested than the basis holds");
  const std::size_t n = basis.grid.interior_count();
  // Mass-weighted modes w_m = Mass phi_m, so f_m(t_k) = w_m . f(t_k).
  std::vector<std::vector<double>> w(M);
  for (std::size_t m = 0; m < M; ++m) w[m] = basis.mass.multiply(basis.interior(m));
  ModalSignal out{problem.forcing.times, std::vector<std::vector<double>>(M), problem.tail};
  const std::size_t N = problem.forcing.times.size();
  parallel_for(M, [&](std::size_t m) {
    auto& c = out.coeffs[m];
    c.resize(N);
    for (std::size_t k = 0; k < N; ++k) {
      const auto f = problem.forcing.at(k).subspan(1, n);
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += w[m][i] * f[i];
      c[k] = s;
    }
  });
  return out;
}

struct ModeTrajectory {
  std::vector<double> d;
  std::vector<double> dprime;
};

/// One mode through the oscillator kernel with mu = sqrt(lambda).
inline ModeTrajectory evolve_mode(double lambda, double d0, double v0, const SampledSignal& f_m,
                                  std::span<const double> eval_times) {
  detail::require(std::isfinite(lambda) && lambda > 0.0, "evolve_mode: eigenvalue must be > 0");
  auto traj = oscillator::solve_ivp(oscillator::OscillatorScenario{std::sqrt(lambda), f_m, d0, v0}, eval_times);
  return {std::move(traj.y), std::move(traj.yprime)};
}

/// Modal initial-value problem: per-mode data, forcing and eigenvalues.
struct ModalProblem {
  std::vector<double> eigenvalues;
  ModalSignal forcing;
  std::vector<double> d0;
  std::vector<double> v0;
};

inline std::vector<SpectralState> evolve(const ModalProblem& p, std::span<const double> eval_times) {
  const std::size_t M = p.eigenvalues.size();
  detail::require(p.forcing.modes() == M && p.d0.size() == M && p.v0.size() == M,
                  "evolve: modal problem dimensions disagree");
  std::vector<ModeTrajectory> per_mode(M);
  parallel_for(M, [&](std::size_t m) {
    per_mode[m] = evolve_mode(p.eigenvalues[m], p.d0[m], p.v0[m], p.forcing.mode(m), eval_times);
  });
  std::vector<SpectralState> states(eval_times.size());
  for (std::size_t k = 0; k < states.size(); ++k) {
    states[k].t = eval_times[k];
    states[k].d.resize(M);
    states[k].dprime.resize(M);
    for (std::size_t m = 0; m < M; ++m) {
      states[k].d[m] = per_mode[m].d[k];
      states[k].dprime[m] = per_mode[m].dprime[k];
    }
  }
  return states;
}

inline ModalProblem modal_problem(const WaveProblem& problem, std::size_t M) {
  problem.validate();
  const EigenBasis& basis = *problem.basis;
  detail::require(M >= 1 && M <= basis.count(), "solve: need 1 <= M <= basis size");
  return {std::vector<double>(basis.eigenvalues.begin(), basis.eigenvalues.begin() + static_cast<std::ptrdiff_t>(M)),
          project_forcing(problem, M), project(problem.g, basis, M), project(problem.h, basis, M)};
}

inline std::vector<SpectralState> solve(const WaveProblem& problem, std::span<const double> eval_times,
                                        std::size_t M) {
  return evolve(modal_problem(problem, M), eval_times);
}

/// sum_m d_m phi_m at every node, accumulated in ascending m.
inline std::vector<double> reconstruct(std::span<const double> coeffs, const EigenBasis& basis) {
  detail::require(coeffs.size() <= basis.count(), "reconstruct: more coefficients than modes");
  std::vector<double> u(basis.grid.node_count(), 0.0);
  for (std::size_t m = 0; m < coeffs.size(); ++m) {
    const auto& phi = basis.modes[m];
    for (std::size_t i = 0; i < u.size(); ++i) u[i] += coeffs[m] * phi[i];
  }
  return u;
}

inline std::vector<double> reconstruct(const SpectralState& state, const EigenBasis& basis) {
  return reconstruct(state.d, basis);
}

inline double l2_norm(const SpectralState& state) {
  double s = 0.0;
  for (double v : state.d) s += v * v;
  return std::sqrt(s);
}

/// (1/2) (sum dprime_m^2 + sum lambda_m d_m^2)
inline double energy(const SpectralState& state, std::span<const double> eigenvalues) {
  detail::require(eigenvalues.size() >= state.d.size(), "energy: missing eigenvalues");
  double s = 0.0;
  for (std::size_t m = 0; m < state.d.size(); ++m) {
    s += state.dprime[m] * state.dprime[m] + eigenvalues[m] * state.d[m] * state.d[m];
  }
  return 0.5 * s;
}

inline double energy(const SpectralState& state, const EigenBasis& basis) { return energy(state, basis.eigenvalues); }

struct EnergyBalance {
  double initial_energy = 0.0;
  double max_defect = 0.0;  // max_t |E(t) - E(0) - W(t)|
  double relative_defect() const { return max_defect / (1.0 + initial_energy); }
};

/// Checks E(t) - E(0) = int_0^t sum_m f_m d_m' ds along the states.
inline EnergyBalance energy_balance(std::span<const SpectralState> states, const ModalSignal& forcing,
                                    std::span<const double> eigenvalues) {
  detail::require(states.size() >= 2, "energy_balance: need at least two states");
  std::vector<double> t(states.size()), power(states.size());
  std::vector<SampledSignal> modes;
  for (std::size_t m = 0; m < forcing.modes(); ++m) modes.push_back(forcing.mode(m));
  for (std::size_t k = 0; k < states.size(); ++k) {
    t[k] = states[k].t;
    double p = 0.0;
    for (std::size_t m = 0; m < states[k].d.size(); ++m) p += modes[m].value_at(t[k]) * states[k].dprime[m];
    power[k] = p;
  }
  // The power vanishes past a compact support; stop the quadrature at its
  // end rather than integrate across the jump.
  std::size_t end = t.size() - 1;
  double end_time = t.back();
  if (const auto* cs = std::get_if<CompactSupport>(&forcing.tail.kind); cs && cs->support_end < t.back()) {
    end = static_cast<std::size_t>(std::upper_bound(t.begin(), t.end(), cs->support_end) - t.begin()) - 1;
    end_time = cs->support_end;
  }
  const CumulativeIntegral work(t, power, end, end_time, is_uniform_grid(t));
  EnergyBalance out;
  out.initial_energy = energy(states.front(), eigenvalues);
  for (std::size_t k = 0; k < states.size(); ++k) {
    const double defect = energy(states[k], eigenvalues) - out.initial_energy - work.at_node(k);
    out.max_defect = std::max(out.max_defect, std::abs(defect));
  }
  return out;
}

struct APrioriBound {
  double lhs = 0.0;  // (1/4) sup |u_t|^2 + (lambda_ell / 2) sup |Du|^2
  double rhs = 0.0;  // 4 |f|_{L1 L2}^2 + |h|^2 + B(g, g)
  bool holds() const { return lhs <= rhs * (1.0 + 1e-12) + 1e-14; }
};

/// Energy a-priori bound for the truncated series,
///   (1/4) sup_t |u_t|^2 + (lambda/2) sup_t |Du|^2 <= 4 |f|^2_{L1(L2)} + |h|^2 + B(g,g),
/// with lambda the ellipticity constant and B(g,g) = sum lambda_m g_m^2.
inline APrioriBound a_priori_bound(std::span<const SpectralState> states, const ModalSignal& forcing,
                                   const EigenBasis& basis, double lambda_ell) {
  detail::require(!states.empty(), "a_priori_bound: no states");
  const std::size_t M = states.front().d.size();
  const auto G = basis.gradient_gram(M);
  double sup_vel = 0.0, sup_grad = 0.0;
  for (const auto& s : states) {
    double v = 0.0, gq = 0.0;
    for (std::size_t m = 0; m < M; ++m) {
      v += s.dprime[m] * s.dprime[m];
      double row = 0.0;
      for (std::size_t k = 0; k < M; ++k) row += G[m * M + k] * s.d[k];
      gq += s.d[m] * row;
    }
    sup_vel = std::max(sup_vel, v);
    sup_grad = std::max(sup_grad, gq);
  }
  const double f_l1 = CumulativeIntegral(forcing.times, forcing.l2_norms(), forcing.mode(0).integration_end(),
                                         forcing.mode(0).integration_end_time(), is_uniform_grid(forcing.times))
                          .total();
  const auto& s0 = states.front();
  double h2 = 0.0, bg = 0.0;
  for (std::size_t m = 0; m < M; ++m) {
    h2 += s0.dprime[m] * s0.dprime[m];
    bg += basis.eigenvalues[m] * s0.d[m] * s0.d[m];
  }
  return {0.25 * sup_vel + 0.5 * lambda_ell * sup_grad, 4.0 * f_l1 * f_l1 + h2 + bg};
}

/// sup_t (sum_{m > M/2} d_m^2)^{1/2}: distance between the M-term and the
/// M/2-term truncations of the series.
inline double truncation_gap(std::span<const SpectralState> states) {
  double worst = 0.0;
  for (const auto& s : states) {
    double acc = 0.0;
    for (std::size_t m = s.d.size() / 2; m < s.d.size(); ++m) acc += s.d[m] * s.d[m];
    worst = std::max(worst, std::sqrt(acc));
  }
  return worst;
}

}  // namespace wavedecay::wave
