#pragma once

// Leapfrog finite differences for u_tt - (a u_x)_x = f on (0, length) with
// u = 0 at both ends. Shares no code with the modal solver so that it can
// serve as an independent check of it.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "wavedecay/error.hpp"

namespace wavedecay::fdtd {

struct FdtdProblem {
  double length = 1.0;
  std::function<double(double)> a = [](double) { return 1.0; };
  std::function<double(double)> g = [](double) { return 0.0; };
  std::function<double(double)> h = [](double) { return 0.0; };
  std::function<double(double, double)> f = [](double, double) { return 0.0; };
};

struct FdtdConfig {
  double dx = 0.01;
  double dt = 0.005;
  double T = 1.0;
  double cfl_safety = 0.5;
  std::size_t record_every = 1;

  /// dt = cfl_safety * dx / sqrt(a_max).
  static FdtdConfig from_cfl(double dx, double T, double a_max, double cfl_safety = 0.5,
                             std::size_t record_every = 1) {
    return {dx, cfl_safety * dx / std::sqrt(a_max), T, cfl_safety, record_every};
  }
};

struct GridTrajectory {
  double length = 0.0;
  double dx = 0.0;
  double dt = 0.0;
  std::vector<double> times;
  std::vector<std::vector<double>> snapshots;  // all nodes, boundaries included
  std::vector<double> energies;                // staggered discrete energy at recorded steps

  /// sqrt(dx * sum u_i^2)
  static double l2_norm(const std::vector<double>& u, double dx) {
    double s = 0.0;
    for (double v : u) s += v * v;
    return std::sqrt(dx * s);
  }
};

inline GridTrajectory fdtd_solve(const FdtdProblem& p, const FdtdConfig& cfg) {
  detail::require(p.length > 0.0, "fdtd: length must be > 0");
  detail::require(cfg.dx > 0.0 && cfg.dt > 0.0 && cfg.T > 0.0, "fdtd: dx, dt, T must be > 0");
  detail::require(cfg.cfl_safety > 0.0 && cfg.cfl_safety <= 1.0, "fdtd: cfl_safety must lie in (0, 1]");
  detail::require(cfg.record_every >= 1, "fdtd: record_every must be >= 1");
  const auto cells = static_cast<std::size_t>(std::llround(p.length / cfg.dx));
  detail::require(cells >= 2, "fdtd: grid needs at least 2 cells");
  const double dx = p.length / static_cast<double>(cells);
  const double dt = cfg.dt;
  const std::size_t n = cells + 1;

  std::vector<double> x(n), am(cells);
  for (std::size_t i = 0; i < n; ++i) x[i] = static_cast<double>(i) * dx;
  x.back() = p.length;
  double a_max = 0.0;
  for (std::size_t i = 0; i < cells; ++i) {
    am[i] = p.a((static_cast<double>(i) + 0.5) * dx);
    detail::require(am[i] > 0.0 && std::isfinite(am[i]), "fdtd: coefficient must be positive and finite");
    a_max = std::max(a_max, am[i]);
  }
  if (dt > cfg.cfl_safety * dx / std::sqrt(a_max) * (1.0 + 1e-12)) {
    throw PreconditionError("fdtd: CFL violated, dt = " + std::to_string(dt) +
                            " > " + std::to_string(cfg.cfl_safety * dx / std::sqrt(a_max)));
  }

  const double inv_dx2 = 1.0 / (dx * dx);
  auto flux_div = [&](const std::vector<double>& u, std::size_t i) {
    return (am[i] * (u[i + 1] - u[i]) - am[i - 1] * (u[i] - u[i - 1])) * inv_dx2;
  };
  auto energy = [&](const std::vector<double>& prev, const std::vector<double>& cur) {
    double kin = 0.0, pot = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double v = (cur[i] - prev[i]) / dt;
      kin += v * v;
    }
    for (std::size_t i = 0; i < cells; ++i) pot += am[i] * (cur[i + 1] - cur[i]) * (prev[i + 1] - prev[i]);
    return 0.5 * dx * kin + 0.5 * pot / dx;
  };

  const auto steps = static_cast<std::size_t>(std::ceil(cfg.T / dt - 1e-9));
  GridTrajectory out;
  out.length = p.length;
  out.dx = dx;
  out.dt = dt;

  std::vector<double> prev(n, 0.0), cur(n, 0.0), next(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) prev[i] = p.g(x[i]);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    cur[i] = prev[i] + dt * p.h(x[i]) + 0.5 * dt * dt * (flux_div(prev, i) + p.f(0.0, x[i]));
  }
  out.times.push_back(0.0);
  out.snapshots.push_back(prev);
  out.energies.push_back(energy(prev, cur));
  if (cfg.record_every == 1 || steps == 1) {
    out.times.push_back(dt);
    out.snapshots.push_back(cur);
    out.energies.push_back(energy(prev, cur));
  }

  for (std::size_t k = 1; k < steps; ++k) {
    const double t = static_cast<double>(k) * dt;
    for (std::size_t i = 1; i + 1 < n; ++i) {
      next[i] = 2.0 * cur[i] - prev[i] + dt * dt * (flux_div(cur, i) + p.f(t, x[i]));
    }
    next.front() = next.back() = 0.0;
    const double e = energy(cur, next);
    if (!std::isfinite(e)) throw std::runtime_error("fdtd: non-finite state at step " + std::to_string(k + 1));
    std::swap(prev, cur);
    std::swap(cur, next);
    if ((k + 1) % cfg.record_every == 0 || k + 1 == steps) {
      out.times.push_back(static_cast<double>(k + 1) * dt);
      out.snapshots.push_back(cur);
      out.energies.push_back(e);
    }
  }
  return out;
}

}  // namespace wavedecay::fdtd
