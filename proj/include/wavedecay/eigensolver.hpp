#pragma once

// Dirichlet eigenpairs of L u = -(a(x) u')' on (0, length): closed form for
// constant a, P1 finite elements plus a tridiagonal pencil eigensolver for
// variable a.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "wavedecay/error.hpp"
#include "wavedecay/parallel.hpp"
#include "wavedecay/tridiagonal.hpp"

namespace wavedecay {

/// Uniform grid on [0, length] with n_cells cells; nodes 0..n_cells.
struct Grid1D {
  double length = 1.0;
  std::size_t n_cells = 2;

  Grid1D() = default;
  Grid1D(double length_, std::size_t n_cells_) : length(length_), n_cells(n_cells_) {
    detail::require(std::isfinite(length) && length > 0.0, "grid: length must be > 0");
    detail::require(n_cells >= 2, "grid: need at least 2 cells");
  }

  double spacing() const { return length / static_cast<double>(n_cells); }
  std::size_t node_count() const { return n_cells + 1; }
  std::size_t interior_count() const { return n_cells - 1; }
  double node(std::size_t i) const { return i == n_cells ? length : static_cast<double>(i) * spacing(); }
  double midpoint(std::size_t cell) const { return (static_cast<double>(cell) + 0.5) * spacing(); }

  std::vector<double> nodes() const {
    std::vector<double> x(node_count());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = node(i);
    return x;
  }

  /// f sampled at every node.
  template <class F>
  std::vector<double> sample(F&& f) const {
    std::vector<double> v(node_count());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(node(i));
    return v;
  }
};

/// Stiffness coefficient a(x), sampled at cell midpoints.
struct CoefficientField {
  std::vector<double> midpoint_values;

  static CoefficientField constant(const Grid1D& grid, double a) {
    return {std::vector<double>(grid.n_cells, a)};
  }

  template <class F>
  static CoefficientField from_function(const Grid1D& grid, F&& a) {
    CoefficientField c;
    c.midpoint_values.resize(grid.n_cells);
    for (std::size_t e = 0; e < grid.n_cells; ++e) c.midpoint_values[e] = a(grid.midpoint(e));
    return c;
  }

  /// Piecewise-linear interpolation of scattered samples (x_i, a_i) to the
  /// cell midpoints; constant extrapolation outside the sampled range.
  static CoefficientField from_samples(const Grid1D& grid, std::span<const double> x, std::span<const double> a) {
    detail::require(!x.empty() && x.size() == a.size(), "coefficient: need matching, non-empty samples");
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
      detail::require(x[i + 1] > x[i], "coefficient: sample abscissae must be strictly increasing");
    }
    return from_function(grid, [&](double xm) {
      if (xm <= x.front()) return a.front();
      if (xm >= x.back()) return a.back();
      const auto k = static_cast<std::size_t>(std::upper_bound(x.begin(), x.end(), xm) - x.begin()) - 1;
      const double w = (xm - x[k]) / (x[k + 1] - x[k]);
      return (1.0 - w) * a[k] + w * a[k + 1];
    });
  }

  double min() const { return *std::min_element(midpoint_values.begin(), midpoint_values.end()); }
  double max() const { return *std::max_element(midpoint_values.begin(), midpoint_values.end()); }
};

struct EllipticityReport {
  double lambda = 0.0;  // min a(x) over the samples
  bool near_degenerate = false;
};

/// Minimum coefficient sample; throws if any sample is non-positive or non-finite.
inline EllipticityReport ellipticity_check(const CoefficientField& coeff, double floor = 1e-6) {
  detail::require(!coeff.midpoint_values.empty(), "ellipticity: empty coefficient field");
  for (double v : coeff.midpoint_values) {
    detail::require(std::isfinite(v), "ellipticity: coefficient sample is not finite (a must be bounded)");
  }
  const double lo = coeff.min();
  if (!(lo > 0.0)) {
    throw PreconditionError("ellipticity violated: min a(x) = " + std::to_string(lo) + " <= 0");
  }
  return {lo, lo < floor};
}

struct FemMatrices {
  SymTridiagonal stiffness;
  SymTridiagonal mass;
};

/// P1 stiffness (midpoint a per cell) and consistent mass on interior nodes.
inline FemMatrices assemble_fem(const Grid1D& grid, const CoefficientField& coeff) {
  detail::require(coeff.midpoint_values.size() == grid.n_cells, "assemble: one coefficient per cell required");
  ellipticity_check(coeff, 0.0);
  const std::size_t n = grid.interior_count();
  const double h = grid.spacing();
  FemMatrices fem{SymTridiagonal(n), SymTridiagonal(n)};
  // Interior node i (0-based) is grid node i+1, between cells i and i+1.
  for (std::size_t i = 0; i < n; ++i) {
    fem.stiffness.diag[i] = (coeff.midpoint_values[i] + coeff.midpoint_values[i + 1]) / h;
    fem.mass.diag[i] = 2.0 * h / 3.0;
    if (i + 1 < n) {
      fem.stiffness.off[i] = -coeff.midpoint_values[i + 1] / h;
      fem.mass.off[i] = h / 6.0;
    }
  }
  return fem;
}

enum class BasisSource { Analytic, FEM };

/// L2-orthonormal Dirichlet eigenbasis, eigenvalues ascending.
///
/// Mode shapes are stored at every grid node (boundary entries zero); the
/// mass and stiffness matrices act on interior nodes. The analytic basis
/// uses the lumped mass h*I, under which sampled sines are exactly
/// orthonormal; FEM bases use the consistent P1 mass.
struct EigenBasis {
  Grid1D grid;
  BasisSource source = BasisSource::FEM;
  std::vector<double> eigenvalues;
  std::vector<std::vector<double>> modes;
  SymTridiagonal mass;
  SymTridiagonal stiffness;
  double a_const = 0.0;  // analytic only

  std::size_t count() const { return eigenvalues.size(); }

  std::span<const double> interior(std::size_t m) const {
    return std::span<const double>(modes[m]).subspan(1, grid.interior_count());
  }

  /// Mass-weighted inner product of two nodal fields (boundary entries ignored).
  double inner(std::span<const double> u, std::span<const double> v) const {
    const std::size_t n = grid.interior_count();
    return mass.form(u.subspan(1, n), v.subspan(1, n));
  }

  /// G(m,k) = int phi_m' phi_k' dx for the first M modes (row-major).
  std::vector<double> gradient_gram(std::size_t M) const {
    std::vector<double> g(M * M, 0.0);
    if (source == BasisSource::Analytic) {
      for (std::size_t m = 0; m < M; ++m) {
        const double k = static_cast<double>(m + 1) * std::numbers::pi / grid.length;
        g[m * M + m] = k * k;
      }
      return g;
    }
    const auto unit = assemble_fem(grid, CoefficientField::constant(grid, 1.0)).stiffness;
    std::vector<std::vector<double>> kphi(M);
    for (std::size_t m = 0; m < M; ++m) kphi[m] = unit.multiply(interior(m));
    for (std::size_t m = 0; m < M; ++m) {
      for (std::size_t k = m; k < M; ++k) {
        double s = 0.0;
        const auto pk = interior(k);
        for (std::size_t i = 0; i < pk.size(); ++i) s += kphi[m][i] * pk[i];
        g[m * M + k] = g[k * M + m] = s;
      }
    }
    return g;
  }
};

/// lambda_m = a (m pi / length)^2, phi_m = sqrt(2/length) sin(m pi x / length).
inline EigenBasis analytic_interval_basis(double length, double a_const, std::size_t M, std::size_t n_cells = 1000) {
  detail::require(std::isfinite(length) && length > 0.0, "analytic basis: length must be > 0");
  detail::require(std::isfinite(a_const) && a_const > 0.0, "analytic basis: coefficient must be > 0");
  detail::require(M >= 1, "analytic basis: need at least one mode");
  const Grid1D grid(length, n_cells);
  detail::require(M <= grid.interior_count(), "analytic basis: more modes than interior nodes");
  EigenBasis b;
  b.grid = grid;
  b.source = BasisSource::Analytic;
  b.a_const = a_const;
  b.stiffness = assemble_fem(grid, CoefficientField::constant(grid, a_const)).stiffness;
  b.mass = SymTridiagonal(grid.interior_count());
  std::fill(b.mass.diag.begin(), b.mass.diag.end(), grid.spacing());
  const double norm = std::sqrt(2.0 / length);
  for (std::size_t m = 1; m <= M; ++m) {
    const double k = static_cast<double>(m) * std::numbers::pi / length;
    b.eigenvalues.push_back(a_const * k * k);
    std::vector<double> phi(grid.node_count(), 0.0);
    for (std::size_t i = 1; i < grid.n_cells; ++i) {
      // Integer phase reduction keeps sin exact-zero structure at large m.
      phi[i] = norm * std::sin(std::numbers::pi * static_cast<double>((m * i) % (2 * grid.n_cells)) /
                               static_cast<double>(grid.n_cells));
    }
    b.modes.push_back(std::move(phi));
  }
  return b;
}

struct EigenSolverOptions {
  std::size_t max_iterations = 8;
  std::size_t max_restarts = 3;
  std::uint32_t seed = 20240601u;
};

/// Smallest M eigenpairs of K phi = lambda Mass phi.
///
/// With Mass = L L^T, the pencil is congruent to the standard symmetric
/// problem C = L^{-1} K L^{-T}. Eigenvalues come from bisection on the
/// inertia of K - sigma Mass; eigenvectors from inverse iteration on C,
/// carried out with tridiagonal solves, followed by one Gram-Schmidt sweep
/// in ascending order and the sign convention phi[first interior] > 0.
inline EigenBasis solve_generalized_eig(const Grid1D& grid, const FemMatrices& fem, std::size_t M,
                                        const EigenSolverOptions& opts = {}) {
  const SymTridiagonal& K = fem.stiffness;
  const SymTridiagonal& Ms = fem.mass;
  const std::size_t n = K.size();
  detail::require(n == grid.interior_count() && Ms.size() == n, "eigensolver: matrix size does not match grid");
  detail::require(M >= 1 && M <= n, "eigensolver: need 1 <= M <= interior node count");
  const BidiagonalCholesky chol(Ms);

  // Bisection.
  double hi = 1.0;
  while (sturm_count(K, Ms, hi) < M) {
    hi *= 2.0;
    if (!std::isfinite(hi)) throw ConvergenceError("eigensolver: cannot bracket the spectrum");
  }
  std::vector<double> lambda(M);
  for (std::size_t j = 0; j < M; ++j) {
    double lo = j == 0 ? 0.0 : lambda[j - 1];
    double up = hi;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + up);
      if (mid <= lo || mid >= up) break;
      if (sturm_count(K, Ms, mid) > j)
        up = mid;
      else
        lo = mid;
    }
    lambda[j] = 0.5 * (lo + up);
  }

  // Inverse iteration, one independent task per mode.
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) scale = std::max(scale, std::abs(K.diag[i]) + hi * std::abs(Ms.diag[i]));
  const double pivot_floor = std::numeric_limits<double>::epsilon() * scale;
  std::vector<std::vector<double>> ys(M);
  parallel_for(M, [&](std::size_t j) {
    const double sigma = lambda[j];
    std::vector<double> lower(n > 0 ? n - 1 : 0), diag(n), upper(n > 0 ? n - 1 : 0);
    for (std::size_t i = 0; i < n; ++i) diag[i] = K.diag[i] - sigma * Ms.diag[i];
    for (std::size_t i = 0; i + 1 < n; ++i) lower[i] = upper[i] = K.off[i] - sigma * Ms.off[i];
    auto normalize = [](std::vector<double>& v) {
      double s = 0.0;
      for (double x : v) s += x * x;
      s = std::sqrt(s);
      for (double& x : v) x /= s;
    };
    for (std::size_t restart = 0; restart <= opts.max_restarts; ++restart) {
      std::mt19937 rng(opts.seed + static_cast<std::uint32_t>(1000 * restart + j));
      std::uniform_real_distribution<double> dist(-1.0, 1.0);
      std::vector<double> y(n);
      for (double& v : y) v = dist(rng);
      normalize(y);
      for (std::size_t it = 0; it < opts.max_iterations; ++it) {
        auto x = solve_tridiagonal(lower, diag, upper, chol.apply(y), pivot_floor);
        auto next = chol.apply_transpose(x);
        normalize(next);
        bool finite = true;
        for (double v : next) finite = finite && std::isfinite(v);
        if (!finite) break;
        double overlap = 0.0;
        for (std::size_t i = 0; i < n; ++i) overlap += next[i] * y[i];
        y = std::move(next);
        if (it > 0 && std::abs(1.0 - std::abs(overlap)) < 1e-13) {
          ys[j] = std::move(y);
          return;
        }
      }
    }
    throw ConvergenceError("eigensolver: inverse iteration did not converge for mode " + std::to_string(j + 1));
  });

  // Re-orthogonalize in ascending order (Euclidean in y <=> Mass in phi).
  for (std::size_t j = 0; j < M; ++j) {
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t k = 0; k < j; ++k) {
        double p = 0.0;
        for (std::size_t i = 0; i < n; ++i) p += ys[j][i] * ys[k][i];
        for (std::size_t i = 0; i < n; ++i) ys[j][i] -= p * ys[k][i];
      }
      double s = 0.0;
      for (double v : ys[j]) s += v * v;
      s = std::sqrt(s);
      for (double& v : ys[j]) v /= s;
    }
  }

  EigenBasis b;
  b.grid = grid;
  b.source = BasisSource::FEM;
  b.mass = Ms;
  b.stiffness = K;
  for (std::size_t j = 0; j < M; ++j) {
    auto phi = chol.solve_transpose(ys[j]);
    const double mnorm = std::sqrt(Ms.form(phi, phi));
    const double sign = phi[0] < 0.0 ? -1.0 : 1.0;
    for (double& v : phi) v *= sign / mnorm;
    const double rq = K.form(phi, phi) / Ms.form(phi, phi);
    if (j > 0 && !(rq > b.eigenvalues.back() * (1.0 + 1e-9))) {
      throw ConvergenceError("eigensolver: eigenvalues " + std::to_string(j) + " and " + std::to_string(j + 1) +
                             " are not simple");
    }
    b.eigenvalues.push_back(rq);
    std::vector<double> full(grid.node_count(), 0.0);
    std::copy(phi.begin(), phi.end(), full.begin() + 1);
    b.modes.push_back(std::move(full));
  }
  return b;
}

/// Assembles and solves in one step.
inline EigenBasis fem_interval_basis(const Grid1D& grid, const CoefficientField& coeff, std::size_t M,
                                     const EigenSolverOptions& opts = {}) {
  return solve_generalized_eig(grid, assemble_fem(grid, coeff), M, opts);
}

/// sqrt(B(phi_m, phi_m)) for 1-based m; equals sqrt(lambda_m) for an eigenfunction.
inline double b_norm_check(const EigenBasis& basis, std::size_t m) {
  detail::require(m >= 1 && m <= basis.count(), "b_norm_check: mode index out of range");
  if (basis.source == BasisSource::Analytic) {
    // exact B-form of the sampled closed-form eigenfunction
    return std::sqrt(basis.a_const) * static_cast<double>(m) * std::numbers::pi / basis.grid.length;
  }
  const auto phi = basis.interior(m - 1);
  return std::sqrt(basis.stiffness.form(phi, phi));
}

}  // namespace wavedecay
