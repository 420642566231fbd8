#pragma once

// Shared problem builders for the test suites.

#include <cmath>
#include <memory>
#include <numbers>
#include <vector>

#include "wavedecay/eigensolver.hpp"
#include "wavedecay/wave_solver.hpp"

namespace testing {

using namespace wavedecay;

inline constexpr double pi = std::numbers::pi;

inline std::shared_ptr<const EigenBasis> sine_basis(std::size_t M, std::size_t cells, double a = 1.0) {
  return std::make_shared<const EigenBasis>(analytic_interval_basis(pi, a, M, cells));
}

/// f(t, x) = e^{-t} sin x on (0, pi), g = h = 0.
inline wave::WaveProblem exp_sine_problem(std::shared_ptr<const EigenBasis> basis, double dt, double T) {
  wave::WaveProblem p;
  p.forcing = wave::SpaceTimeField::sample(basis->grid, wave::uniform_times(dt, T),
                                           [](double t, double x) { return std::exp(-t) * std::sin(x); });
  p.g.assign(basis->grid.node_count(), 0.0);
  p.h.assign(basis->grid.node_count(), 0.0);
  p.tail = TailPolicy::exponential(std::sqrt(pi / 2.0), 1.0);
  p.basis = std::move(basis);
  return p;
}

/// Discrete L2 distance between a state and a nodal field.
inline double l2_distance(const wave::SpectralState& s, const EigenBasis& b, const std::vector<double>& u) {
  auto diff = wave::reconstruct(s, b);
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] -= u[i];
  return std::sqrt(b.inner(diff, diff));
}

}  // namespace testing

namespace testing {

/// f(t, x) = 1_{[0, pi]}(t) phi_1(x).
inline wave::WaveProblem boxcar_mode_problem(std::shared_ptr<const wavedecay::EigenBasis> basis, double dt, double T) {
  wave::WaveProblem p;
  const auto phi1 = basis->modes[0];
  p.forcing = wave::SpaceTimeField::sample(basis->grid, wave::uniform_times(dt, T), [](double, double) { return 0.0; });
  for (std::size_t k = 0; k < p.forcing.times.size(); ++k) {
    if (p.forcing.times[k] > pi) break;
    for (std::size_t i = 0; i < phi1.size(); ++i) p.forcing.values[k * phi1.size() + i] = phi1[i];
  }
  p.g.assign(basis->grid.node_count(), 0.0);
  p.h.assign(basis->grid.node_count(), 0.0);
  p.tail = wavedecay::TailPolicy::compact(pi);
  p.basis = std::move(basis);
  return p;
}

/// f(t, x) = sin^2(pi t / Tf) x (length - x) for t <= Tf, zero afterwards.
inline wave::WaveProblem bump_problem(std::shared_ptr<const wavedecay::EigenBasis> basis, double Tf, double dt,
                                      double T) {
  wave::WaveProblem p;
  const double L = basis->grid.length;
  p.forcing = wave::SpaceTimeField::sample(basis->grid, wave::uniform_times(dt, T), [&](double t, double x) {
    if (t >= Tf) return 0.0;
    const double s = std::sin(pi * t / Tf);
    return s * s * x * (L - x);
  });
  p.g.assign(basis->grid.node_count(), 0.0);
  p.h.assign(basis->grid.node_count(), 0.0);
  p.tail = wavedecay::TailPolicy::compact(Tf);
  p.basis = std::move(basis);
  return p;
}

}  // namespace testing
