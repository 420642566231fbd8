#pragma once

// Forced harmonic oscillator y'' + mu^2 y = f on [0, inf): exact Duhamel
// solution, the decay-selecting initial values and the tail amplitude that
// separates decaying from persistently oscillating solutions.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "wavedecay/error.hpp"
#include "wavedecay/signal.hpp"

namespace wavedecay::oscillator {

struct OscillatorScenario {
  double mu = 1.0;
  SampledSignal forcing;
  double y0 = 0.0;
  double v0 = 0.0;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<double> y;
  std::vector<double> yprime;
};

struct InitialValues {
  double y0 = 0.0;
  double v0 = 0.0;
};

/// Running sine and cosine transforms of a forcing signal.
struct Transforms {
  std::vector<double> sine;    // int_0^{t_k} sin(mu s) f(s) ds
  std::vector<double> cosine;  // int_0^{t_k} cos(mu s) f(s) ds
  double sine_inf = 0.0;
  double cosine_inf = 0.0;
  double tail_bound = 0.0;
  bool tail_bound_rigorous = true;
};

inline void require_frequency(double mu) {
  detail::require(std::isfinite(mu) && mu > 0.0, "oscillator: frequency mu must be > 0");
}

/// Truncation error of the improper integrals implied by the tail policy.
/// TruncateAtEnd has no bound; the mass int |f| over the last period
/// (capped at half the window) is returned as a heuristic instead.
inline double tail_estimate(const SampledSignal& f, double mu, bool* rigorous = nullptr) {
  const auto& tail = f.tail();
  if (rigorous) *rigorous = true;
  if (tail.is_compact()) return 0.0;
  if (const auto* env = std::get_if<ExponentialEnvelope>(&tail.kind)) {
    return env->scale * std::exp(-env->rate * f.end_time()) / env->rate;
  }
  if (rigorous) *rigorous = false;
  const double window = std::min(2.0 * std::numbers::pi / mu, 0.5 * f.end_time());
  std::vector<double> a(f.values().size());
  for (std::size_t k = 0; k < a.size(); ++k) a[k] = std::abs(f.values()[k]);
  const CumulativeIntegral m(f.times(), a);
  return m.total() - m.at(f.end_time() - window);
}

/// Prefix sine/cosine integrals of one forcing at one frequency, built once
/// and evaluated at arbitrary times.
class DuhamelKernel {
 public:
  DuhamelKernel(const SampledSignal& f, double mu)
      : mu_((require_frequency(mu), mu)),
        sine_(f.weighted_integral([mu](double t) { return std::sin(mu * t); })),
        cosine_(f.weighted_integral([mu](double t) { return std::cos(mu * t); })),
        end_time_(f.end_time()),
        compact_(f.tail().is_compact()) {}

  double mu() const { return mu_; }
  const CumulativeIntegral& sine() const { return sine_; }
  const CumulativeIntegral& cosine() const { return cosine_; }
  double sine_inf() const { return sine_.total(); }
  double cosine_inf() const { return cosine_.total(); }

  /// y(t) and y'(t) of the solution with y(0)=y0, y'(0)=v0.
  std::pair<double, double> evaluate(double t, double y0, double v0) const {
    detail::require(t >= 0.0, "oscillator: negative evaluation time");
    detail::require(compact_ || t <= end_time_ * (1.0 + 1e-12),
                    "oscillator: evaluation beyond the sampled window requires compact support");
    const double c = std::cos(mu_ * t);
    const double s = std::sin(mu_ * t);
    const double a = y0 - sine_.at(t) / mu_;
    const double b = v0 + cosine_.at(t);
    // The terms from differentiating the integrals cancel exactly.
    return {c * a + s * b / mu_, -mu_ * s * a + c * b};
  }

 private:
  double mu_;
  CumulativeIntegral sine_;
  CumulativeIntegral cosine_;
  double end_time_;
  bool compact_;
};

inline Transforms sine_cosine_transforms(const SampledSignal& forcing, double mu) {
  const DuhamelKernel kernel(forcing, mu);
  Transforms out;
  out.sine = kernel.sine().node_values();
  out.cosine = kernel.cosine().node_values();
  out.sine_inf = kernel.sine_inf();
  out.cosine_inf = kernel.cosine_inf();
  out.tail_bound = tail_estimate(forcing, mu, &out.tail_bound_rigorous);
  return out;
}

inline void require_admissible_tail(const SampledSignal& forcing, double mu) {
  const double bound = tail_estimate(forcing, mu);
  if (bound > forcing.tail().tolerance) {
    throw PreconditionError("oscillator: tail bound " + std::to_string(bound) + " exceeds tolerance " +
                            std::to_string(forcing.tail().tolerance) + " (" + forcing.tail().name() + ")");
  }
}

/// Initial values for which y(t) -> 0: y0 = S_inf / mu, v0 = -C_inf.
inline InitialValues decay_initial_conditions(const DuhamelKernel& kernel) {
  return {kernel.sine_inf() / kernel.mu(), -kernel.cosine_inf()};
}

inline InitialValues decay_initial_conditions(const SampledSignal& forcing, double mu) {
  require_frequency(mu);
  require_admissible_tail(forcing, mu);
  return decay_initial_conditions(DuhamelKernel(forcing, mu));
}

inline Trajectory solve_ivp(const DuhamelKernel& kernel, double y0, double v0, std::span<const double> eval_times) {
  Trajectory out;
  out.times.assign(eval_times.begin(), eval_times.end());
  out.y.resize(eval_times.size());
  out.yprime.resize(eval_times.size());
  for (std::size_t k = 0; k < eval_times.size(); ++k) {
    std::tie(out.y[k], out.yprime[k]) = kernel.evaluate(eval_times[k], y0, v0);
  }
  return out;
}

inline Trajectory solve_ivp(const OscillatorScenario& sc, std::span<const double> eval_times) {
  return solve_ivp(DuhamelKernel(sc.forcing, sc.mu), sc.y0, sc.v0, eval_times);
}

/// Amplitude of the free oscillation left once the forcing has acted:
/// zero exactly when (y0, v0) are the decay-selecting initial values.
inline double tail_amplitude(const DuhamelKernel& kernel, double y0, double v0) {
  const double mu = kernel.mu();
  return std::hypot(y0 - kernel.sine_inf() / mu, v0 / mu + kernel.cosine_inf() / mu);
}

inline double tail_amplitude(const OscillatorScenario& sc) {
  require_frequency(sc.mu);
  return tail_amplitude(DuhamelKernel(sc.forcing, sc.mu), sc.y0, sc.v0);
}

/// max_k |D^2 y + mu^2 y - f| over interior nodes of a uniformly sampled trajectory.
inline double residual_check(const Trajectory& traj, const OscillatorScenario& sc) {
  const std::size_t n = traj.times.size();
  detail::require(n >= 3, "residual_check: need at least 3 nodes");
  detail::require(traj.y.size() == n, "residual_check: trajectory arrays differ in length");
  detail::require(is_uniform_grid(traj.times, 1e-6), "residual_check: evaluation times must be uniform");
  const double dt = traj.times[1] - traj.times[0];
  const double mu2 = sc.mu * sc.mu;
  double worst = 0.0;
  for (std::size_t k = 1; k + 1 < n; ++k) {
    const double d2 = (traj.y[k + 1] - 2.0 * traj.y[k] + traj.y[k - 1]) / (dt * dt);
    worst = std::max(worst, std::abs(d2 + mu2 * traj.y[k] - sc.forcing.value_at(traj.times[k])));
  }
  return worst;
}

}  // namespace wavedecay::oscillator
