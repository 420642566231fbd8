#include "catch_amalgamated.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "wavedecay/tridiagonal.hpp"

using namespace wavedecay;
using Catch::Matchers::WithinAbs;

namespace {

// Dense Gaussian elimination with partial pivoting; test oracle only.
std::vector<double> dense_solve(std::vector<std::vector<double>> A, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(A[r][c]) > std::abs(A[p][c])) p = r;
    std::swap(A[c], A[p]);
    std::swap(b[c], b[p]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = A[r][c] / A[c][c];
      for (std::size_t k = c; k < n; ++k) A[r][k] -= f * A[c][k];
      b[r] -= f * b[c];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= A[i][k] * x[k];
    x[i] = s / A[i][i];
  }
  return x;
}

}  // namespace

TEST_CASE("pivoted tridiagonal solve matches dense elimination", "[tridiagonal]") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (std::size_t n : {1u, 2u, 3u, 7u, 40u}) {
    for (int trial = 0; trial < 10; ++trial) {
      std::vector<double> lo(n - 1), di(n), up(n - 1), b(n);
      for (auto& v : lo) v = u(rng);
      for (auto& v : up) v = u(rng);
      for (auto& v : di) v = 0.1 * u(rng);  // weak diagonal forces row swaps
      for (auto& v : b) v = u(rng);
      std::vector<std::vector<double>> A(n, std::vector<double>(n, 0.0));
      for (std::size_t i = 0; i < n; ++i) {
        A[i][i] = di[i];
        if (i + 1 < n) {
          A[i + 1][i] = lo[i];
          A[i][i + 1] = up[i];
        }
      }
      const auto expected = dense_solve(A, b);
      const auto x = solve_tridiagonal(lo, di, up, b, 1e-300);
      double scale = 1.0;
      for (double v : expected) scale = std::max(scale, std::abs(v));
      for (std::size_t i = 0; i < n; ++i) REQUIRE_THAT(x[i], WithinAbs(expected[i], 1e-9 * scale));
    }
  }
}

TEST_CASE("bidiagonal Cholesky reproduces the matrix", "[tridiagonal]") {
  SymTridiagonal m(5);
  for (std::size_t i = 0; i < 5; ++i) m.diag[i] = 4.0 + static_cast<double>(i);
  for (std::size_t i = 0; i < 4; ++i) m.off[i] = 1.0 - 0.3 * static_cast<double>(i);
  const BidiagonalCholesky L(m);
  std::vector<double> e(5, 0.0);
  for (std::size_t j = 0; j < 5; ++j) {
    std::fill(e.begin(), e.end(), 0.0);
    e[j] = 1.0;
    const auto col = L.apply(L.apply_transpose(e));
    for (std::size_t i = 0; i < 5; ++i) CHECK_THAT(col[i], WithinAbs(m(i, j), 1e-14));
    const auto back = L.solve_transpose(L.apply_transpose(e));
    for (std::size_t i = 0; i < 5; ++i) CHECK_THAT(back[i], WithinAbs(e[i], 1e-14));
  }
}

TEST_CASE("Cholesky rejects indefinite matrices", "[tridiagonal]") {
  SymTridiagonal m(3);
  m.diag = {1.0, 1.0, 1.0};
  m.off = {2.0, 0.0};
  CHECK_THROWS_AS(BidiagonalCholesky(m), PreconditionError);
}

TEST_CASE("Sturm count matches the Toeplitz closed-form spectrum", "[tridiagonal]") {
  // tridiag(-1, 2, -1) of size n has eigenvalues 2 - 2 cos(k pi / (n + 1)).
  const std::size_t n = 30;
  SymTridiagonal K(n), I(n);
  std::fill(K.diag.begin(), K.diag.end(), 2.0);
  std::fill(K.off.begin(), K.off.end(), -1.0);
  std::fill(I.diag.begin(), I.diag.end(), 1.0);
  std::vector<double> eig(n);
  for (std::size_t k = 1; k <= n; ++k) eig[k - 1] = 2.0 - 2.0 * std::cos(std::numbers::pi * k / (n + 1.0));
  for (double sigma = -0.5; sigma < 4.5; sigma += 0.0137) {
    std::size_t below = 0;
    for (double e : eig) below += e < sigma ? 1 : 0;
    REQUIRE(sturm_count(K, I, sigma) == below);
  }
}
