#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "wavedecay/error.hpp"

namespace wavedecay {

/// Symmetric tridiagonal matrix: diag[i] = A(i,i), off[i] = A(i,i+1).
struct SymTridiagonal {
  std::vector<double> diag;
  std::vector<double> off;

  SymTridiagonal() = default;
  explicit SymTridiagonal(std::size_t n) : diag(n, 0.0), off(n > 0 ? n - 1 : 0, 0.0) {}

  std::size_t size() const { return diag.size(); }

  double operator()(std::size_t i, std::size_t j) const {
    if (i == j) return diag[i];
    if (i + 1 == j) return off[i];
    if (j + 1 == i) return off[j];
    return 0.0;
  }

  /// y = A x
  void multiply(std::span<const double> x, std::span<double> y) const {
    const std::size_t n = size();
    for (std::size_t i = 0; i < n; ++i) {
      double s = diag[i] * x[i];
      if (i > 0) s += off[i - 1] * x[i - 1];
      if (i + 1 < n) s += off[i] * x[i + 1];
      y[i] = s;
    }
  }

  std::vector<double> multiply(std::span<const double> x) const {
    std::vector<double> y(size());
    multiply(x, y);
    return y;
  }

  /// x^T A y
  double form(std::span<const double> x, std::span<const double> y) const {
    const std::size_t n = size();
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double row = diag[i] * y[i];
      if (i > 0) row += off[i - 1] * y[i - 1];
      if (i + 1 < n) row += off[i] * y[i + 1];
      s += x[i] * row;
    }
    return s;
  }

  bool symmetric_positive_diag() const {
    for (double d : diag)
      if (!(d > 0.0)) return false;
    return true;
  }
};

/// Lower bidiagonal Cholesky factor L with A = L L^T.
struct BidiagonalCholesky {
  std::vector<double> diag;  // L(i,i)
  std::vector<double> sub;   // L(i+1,i)

  explicit BidiagonalCholesky(const SymTridiagonal& a) : diag(a.size()), sub(a.off.size()) {
    double prev_sub = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double pivot = a.diag[i] - prev_sub * prev_sub;
      if (!(pivot > 0.0) || !std::isfinite(pivot)) {
        throw PreconditionError("cholesky: matrix is not symmetric positive definite (pivot " +
                                std::to_string(i) + ")");
      }
      diag[i] = std::sqrt(pivot);
      if (i < sub.size()) {
        sub[i] = a.off[i] / diag[i];
        prev_sub = sub[i];
      }
    }
  }

  std::size_t size() const { return diag.size(); }

  /// y = L x
  std::vector<double> apply(std::span<const double> x) const {
    std::vector<double> y(size());
    for (std::size_t i = 0; i < size(); ++i) y[i] = diag[i] * x[i] + (i > 0 ? sub[i - 1] * x[i - 1] : 0.0);
    return y;
  }

  /// y = L^T x
  std::vector<double> apply_transpose(std::span<const double> x) const {
    std::vector<double> y(size());
    for (std::size_t i = 0; i < size(); ++i) y[i] = diag[i] * x[i] + (i + 1 < size() ? sub[i] * x[i + 1] : 0.0);
    return y;
  }

  /// Solves L^T x = b.
  std::vector<double> solve_transpose(std::span<const double> b) const {
    const std::size_t n = size();
    std::vector<double> x(n);
    for (std::size_t i = n; i-- > 0;) {
      double r = b[i];
      if (i + 1 < n) r -= sub[i] * x[i + 1];
      x[i] = r / diag[i];
    }
    return x;
  }
};

/// Number of eigenvalues of the pencil (K, M) strictly below sigma, i.e. the
/// number of negative pivots of K - sigma M (Sylvester inertia; M is SPD).
inline std::size_t sturm_count(const SymTridiagonal& k, const SymTridiagonal& m, double sigma) {
  constexpr double tiny = std::numeric_limits<double>::min() * 1e6;
  std::size_t negatives = 0;
  double d = 1.0;
  for (std::size_t i = 0; i < k.size(); ++i) {
    const double a = k.diag[i] - sigma * m.diag[i];
    if (i == 0) {
      d = a;
    } else {
      const double b = k.off[i - 1] - sigma * m.off[i - 1];
      d = a - b * b / d;
    }
    if (std::abs(d) < tiny) d = -tiny;
    if (d < 0.0) ++negatives;
  }
  return negatives;
}

/// Solves A x = b for a general (possibly indefinite) tridiagonal A given by
/// sub/diag/super diagonals, Gaussian elimination with partial pivoting.
/// Exactly singular pivots are replaced by `pivot_floor`.
inline std::vector<double> solve_tridiagonal(std::vector<double> lower, std::vector<double> diag,
                                             std::vector<double> upper, std::vector<double> b,
                                             double pivot_floor) {
  const std::size_t n = diag.size();
  std::vector<double> upper2(n, 0.0);  // second superdiagonal from row swaps
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (std::abs(lower[i]) > std::abs(diag[i])) {
      // swap rows i and i+1
      std::swap(diag[i], lower[i]);
      const double u = upper[i];
      upper[i] = diag[i + 1];
      diag[i + 1] = u;
      if (i + 2 < n) {
        upper2[i] = upper[i + 1];
        upper[i + 1] = 0.0;
      }
      std::swap(b[i], b[i + 1]);
    }
    if (diag[i] == 0.0) diag[i] = pivot_floor;
    const double f = lower[i] / diag[i];
    diag[i + 1] -= f * upper[i];
    if (i + 2 < n) upper[i + 1] -= f * upper2[i];
    b[i + 1] -= f * b[i];
  }
  if (n > 0 && diag[n - 1] == 0.0) diag[n - 1] = pivot_floor;
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double r = b[i];
    if (i + 1 < n) r -= upper[i] * x[i + 1];
    if (i + 2 < n) r -= upper2[i] * x[i + 2];
    x[i] = r / diag[i];
  }
  return x;
}

}  // namespace wavedecay
