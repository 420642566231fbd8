#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "wavedecay/eigensolver.hpp"
#include "wavedecay/error.hpp"
#include "wavedecay/fdtd.hpp"
#include "wavedecay/wave_solver.hpp"

namespace wavedecay {

/// Piecewise-linear interpolation of a nodal field on `grid` at abscissa x.
inline double interpolate_nodal(std::span<const double> u, const Grid1D& grid, double x) {
  if (x <= 0.0) return u.front();
  if (x >= grid.length) return u.back();
  const double s = x / grid.spacing();
  const auto k = std::min(static_cast<std::size_t>(s), grid.n_cells - 1);
  const double w = s - static_cast<double>(k);
  return (1.0 - w) * u[k] + w * u[k + 1];
}

/// Nodal field on `grid` resampled onto the FDTD nodes of `traj`.
inline std::vector<double> resample_to_fdtd(std::span<const double> u, const Grid1D& grid,
                                            const fdtd::GridTrajectory& traj) {
  const std::size_t n = traj.snapshots.empty() ? 0 : traj.snapshots.front().size();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = interpolate_nodal(u, grid, static_cast<double>(i) * traj.dx);
  return out;
}

struct OracleComparison {
  double max_l2_difference = 0.0;
  double worst_time = 0.0;
  std::size_t shared_times = 0;
};

/// Max over shared times of the discrete L2 distance between the modal
/// solution (reconstructed, interpolated onto the FDTD grid) and the FDTD one.
inline OracleComparison compare(std::span<const wave::SpectralState> modal, const EigenBasis& basis,
                                const fdtd::GridTrajectory& fd) {
  detail::require(std::abs(basis.grid.length - fd.length) <= 1e-12 * fd.length,
                  "compare: modal and FDTD domains differ");
  OracleComparison out;
  std::size_t j = 0;
  for (std::size_t k = 0; k < fd.times.size(); ++k) {
    const double t = fd.times[k];
    const double tol = 1e-9 * std::max(1.0, std::abs(t));
    while (j < modal.size() && modal[j].t < t - tol) ++j;
    if (j == modal.size()) break;
    if (std::abs(modal[j].t - t) > tol) continue;
    const auto u = resample_to_fdtd(wave::reconstruct(modal[j], basis), basis.grid, fd);
    std::vector<double> diff(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) diff[i] = u[i] - fd.snapshots[k][i];
    const double e = fdtd::GridTrajectory::l2_norm(diff, fd.dx);
    if (e >= out.max_l2_difference) {
      out.max_l2_difference = e;
      out.worst_time = t;
    }
    ++out.shared_times;
  }
  detail::require(out.shared_times > 0, "compare: trajectories share no evaluation times");
  return out;
}

}  // namespace wavedecay
