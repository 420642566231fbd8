#pragma once

// Constructive side of the decay dichotomy for the wave equation: the forcing
// alone fixes the only initial data whose solution tends to zero in L2, and
// any other data leaves a free oscillation behind.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "wavedecay/eigensolver.hpp"
#include "wavedecay/error.hpp"
#include "wavedecay/oscillator.hpp"
#include "wavedecay/parallel.hpp"
#include "wavedecay/wave_solver.hpp"

namespace wavedecay::decay {

struct SynthesisResult {
  std::vector<double> g_m;
  std::vector<double> h_m;
  std::vector<double> g_nodal;
  std::vector<double> h_nodal;
  std::vector<double> tail_residuals;  // per-mode truncation bound (or heuristic)
  bool tails_rigorous = true;
  double sum_h2 = 0.0;          // sum h_m^2
  double sum_lambda_g2 = 0.0;   // sum lambda_m g_m^2
  double minkowski_bound = 0.0; // (int (sum f_m^2)^{1/2} dt)^2
  double unresolved_forcing = -1.0;  // int (|f|^2 - sum_{m<=M} f_m^2) dt, < 0 when not computed

  bool summable(double tol = 1e-8) const {
    return sum_h2 <= minkowski_bound + tol && sum_lambda_g2 <= minkowski_bound + tol;
  }
};

/// (int_0^inf (sum_m f_m^2)^{1/2} dt)^2 over the integration range of the signal.
inline double minkowski_bound(const wave::ModalSignal& f) {
  detail::require(f.modes() >= 1, "minkowski_bound: empty modal signal");
  const auto probe = f.mode(0);
  const CumulativeIntegral l1(f.times, f.l2_norms(), probe.integration_end(), probe.integration_end_time(),
                              probe.uniform());
  return l1.total() * l1.total();
}

/// g_m = (1/sqrt(lambda_m)) int_0^inf sin(sqrt(lambda_m) s) f_m ds,
/// h_m = -int_0^inf cos(sqrt(lambda_m) s) f_m ds, for every retained mode.
inline SynthesisResult synthesize_initial_data(const wave::ModalSignal& f, const EigenBasis& basis) {
  const std::size_t M = f.modes();
  detail::require(M >= 1 && M <= basis.count(), "synthesize: mode count must be in [1, basis size]");
  SynthesisResult r;
  r.g_m.resize(M);
  r.h_m.resize(M);
  r.tail_residuals.resize(M);
  std::vector<char> rigorous(M, 1);
  parallel_for(M, [&](std::size_t m) {
    const double mu = std::sqrt(basis.eigenvalues[m]);
    const auto signal = f.mode(m);
    bool exact = true;
    r.tail_residuals[m] = oscillator::tail_estimate(signal, mu, &exact);
    rigorous[m] = exact ? 1 : 0;
    if (r.tail_residuals[m] > signal.tail().tolerance) {
      throw PreconditionError("synthesize: mode " + std::to_string(m + 1) + " tail residual " +
                              std::to_string(r.tail_residuals[m]) + " exceeds tolerance");
    }
    const auto iv = oscillator::decay_initial_conditions(oscillator::DuhamelKernel(signal, mu));
    r.g_m[m] = iv.y0;
    r.h_m[m] = iv.v0;
  });
  r.tails_rigorous = std::all_of(rigorous.begin(), rigorous.end(), [](char c) { return c != 0; });
  for (std::size_t m = 0; m < M; ++m) {
    r.sum_h2 += r.h_m[m] * r.h_m[m];
    r.sum_lambda_g2 += basis.eigenvalues[m] * r.g_m[m] * r.g_m[m];
  }
  r.minkowski_bound = minkowski_bound(f);
  r.g_nodal = wave::reconstruct(r.g_m, basis);
  r.h_nodal = wave::reconstruct(r.h_m, basis);
  return r;
}

/// Synthesis from a full problem; also reports the forcing energy left in
/// the modes beyond M. The problem's own g and h are ignored.
inline SynthesisResult synthesize_initial_data(const wave::WaveProblem& problem, std::size_t M) {
  const auto f = wave::project_forcing(problem, M);
  auto r = synthesize_initial_data(f, *problem.basis);
  const EigenBasis& basis = *problem.basis;
  std::vector<double> residual(f.times.size());
  for (std::size_t k = 0; k < residual.size(); ++k) {
    const auto row = problem.forcing.at(k);
    double resolved = 0.0;
    for (std::size_t m = 0; m < M; ++m) resolved += f.coeffs[m][k] * f.coeffs[m][k];
    residual[k] = std::max(0.0, basis.inner(row, row) - resolved);
  }
  r.unresolved_forcing = integrate(f.times, residual);
  return r;
}

struct Window {
  double start = 0.0;
  double end = 0.0;
};

struct DecayVerdict {
  bool decays = false;
  double sup_tail = 0.0;
  Window window;
  double threshold = 0.0;
};

/// Slowest-mode period 2 pi / sqrt(lambda_1).
inline double slowest_period(double lambda_1) { return 2.0 * std::numbers::pi / std::sqrt(lambda_1); }

/// Checks that the window starts after the forcing has become negligible.
inline void require_window_after_forcing(const Window& w, const TailPolicy& tail, double threshold) {
  if (const auto* cs = std::get_if<CompactSupport>(&tail.kind)) {
    detail::require(w.start >= cs->support_end, "verify_decay: window starts inside the forcing support");
  } else if (const auto* env = std::get_if<ExponentialEnvelope>(&tail.kind)) {
    detail::require(env->scale * std::exp(-env->rate * w.start) <= threshold / 10.0,
                    "verify_decay: forcing envelope still above threshold/10 at window start");
  } else {
    throw PreconditionError("verify_decay: no verdict for forcing without tail structure (truncate_at_end)");
  }
}

/// decays = sup over the window of |u(t)|_{L2} <= threshold.
inline DecayVerdict verify_decay(std::span<const wave::SpectralState> traj, Window window, double threshold,
                                 double lambda_1) {
  detail::require(window.end > window.start, "verify_decay: empty window");
  detail::require(threshold >= 0.0, "verify_decay: negative threshold");
  detail::require(window.end - window.start >= slowest_period(lambda_1) * (1.0 - 1e-12),
                  "verify_decay: window shorter than one period of the slowest mode");
  DecayVerdict v{false, 0.0, window, threshold};
  std::size_t seen = 0;
  for (const auto& s : traj) {
    if (s.t < window.start || s.t > window.end) continue;
    v.sup_tail = std::max(v.sup_tail, wave::l2_norm(s));
    ++seen;
  }
  detail::require(seen >= 2, "verify_decay: trajectory has fewer than two states in the window");
  v.decays = v.sup_tail <= threshold;
  return v;
}

inline DecayVerdict verify_decay(std::span<const wave::SpectralState> traj, Window window, double threshold,
                                 double lambda_1, const TailPolicy& tail) {
  require_window_after_forcing(window, tail, threshold);
  return verify_decay(traj, window, threshold, lambda_1);
}

struct DichotomyAudit {
  std::vector<double> amplitudes;  // per-mode tail amplitude
  double amplitude_tolerance = 1e-6;
  bool all_amplitudes_small = false;
  DecayVerdict verdict;
  /// Both sides of the equivalence agree.
  bool consistent() const { return all_amplitudes_small == verdict.decays; }
};

/// Per-mode tail amplitudes of the problem's own data, cross-checked
/// against the decay verdict of the solved trajectory.
inline DichotomyAudit dichotomy_audit(const wave::WaveProblem& problem, std::size_t M, Window window,
                                      double threshold, std::span<const double> eval_times,
                                      double amplitude_tolerance = 1e-6) {
  const auto mp = wave::modal_problem(problem, M);
  DichotomyAudit a;
  a.amplitude_tolerance = amplitude_tolerance;
  a.amplitudes.resize(M);
  parallel_for(M, [&](std::size_t m) {
    const oscillator::DuhamelKernel kernel(mp.forcing.mode(m), std::sqrt(mp.eigenvalues[m]));
    a.amplitudes[m] = oscillator::tail_amplitude(kernel, mp.d0[m], mp.v0[m]);
  });
  a.all_amplitudes_small =
      std::all_of(a.amplitudes.begin(), a.amplitudes.end(), [&](double x) { return x <= amplitude_tolerance; });
  const auto states = wave::evolve(mp, eval_times);
  a.verdict = verify_decay(states, window, threshold, mp.eigenvalues.front(), problem.tail);
  return a;
}

/// Largest modal discrepancy between alternative initial data and the
/// synthesized decaying data.
inline double uniqueness_check(const SynthesisResult& synthesized, const EigenBasis& basis,
                               std::span<const double> g_alt, std::span<const double> h_alt) {
  const std::size_t M = synthesized.g_m.size();
  const auto g = wave::project(g_alt, basis, M);
  const auto h = wave::project(h_alt, basis, M);
  double worst = 0.0;
  for (std::size_t m = 0; m < M; ++m) {
    worst = std::max({worst, std::abs(g[m] - synthesized.g_m[m]), std::abs(h[m] - synthesized.h_m[m])});
  }
  return worst;
}

inline double uniqueness_check(const wave::ModalSignal& f, const EigenBasis& basis, std::span<const double> g_alt,
                               std::span<const double> h_alt) {
  return uniqueness_check(synthesize_initial_data(f, basis), basis, g_alt, h_alt);
}

}  // namespace wavedecay::decay
