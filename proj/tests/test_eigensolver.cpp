#include "catch_amalgamated.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include "wavedecay/eigensolver.hpp"

using namespace wavedecay;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

constexpr double pi = std::numbers::pi;

// Exact eigenvalues of the P1 pencil for a = 1 on a uniform grid:
// (6/h^2) (1 - cos theta) / (2 + cos theta), theta = m pi h / length.
double p1_eigenvalue(std::size_t m, double length, std::size_t cells) {
  const double h = length / static_cast<double>(cells);
  const double th = static_cast<double>(m) * pi * h / length;
  return 6.0 / (h * h) * (1.0 - std::cos(th)) / (2.0 + std::cos(th));
}

double gram_deviation(const EigenBasis& b) {
  double worst = 0.0;
  for (std::size_t m = 0; m < b.count(); ++m)
    for (std::size_t k = 0; k < b.count(); ++k) {
      const double g = b.mass.form(b.interior(m), b.interior(k));
      worst = std::max(worst, std::abs(g - (m == k ? 1.0 : 0.0)));
    }
  return worst;
}

}  // namespace

TEST_CASE("analytic basis", "[eigensolver]") {
  const auto b = analytic_interval_basis(pi, 1.0, 3);
  REQUIRE(b.count() == 3);
  CHECK_THAT(b.eigenvalues[0], WithinRel(1.0, 1e-14));
  CHECK_THAT(b.eigenvalues[1], WithinRel(4.0, 1e-14));
  CHECK_THAT(b.eigenvalues[2], WithinRel(9.0, 1e-14));
  CHECK_THAT(analytic_interval_basis(1.0, 1.0, 1).eigenvalues[0], WithinRel(pi * pi, 1e-14));
  const auto b4 = analytic_interval_basis(pi, 4.0, 2);
  CHECK_THAT(b4.eigenvalues[0], WithinRel(4.0, 1e-14));
  CHECK_THAT(b4.eigenvalues[1], WithinRel(16.0, 1e-14));
  // sampled sines are orthonormal under the lumped mass
  CHECK(gram_deviation(analytic_interval_basis(pi, 1.0, 40, 200)) <= 1e-12);
  CHECK(b.modes[0][1] > 0.0);
  CHECK(b.modes[0].front() == 0.0);
  CHECK(b.modes[0].back() == 0.0);
}

TEST_CASE("analytic basis rejects non-positive input", "[eigensolver]") {
  CHECK_THROWS_AS(analytic_interval_basis(0.0, 1.0, 1), PreconditionError);
  CHECK_THROWS_AS(analytic_interval_basis(1.0, -1.0, 1), PreconditionError);
  CHECK_THROWS_AS(analytic_interval_basis(1.0, 1.0, 0), PreconditionError);
}

TEST_CASE("P1 assembly", "[eigensolver]") {
  const Grid1D grid(1.0, 10);
  const double h = 0.1;
  const auto fem = assemble_fem(grid, CoefficientField::constant(grid, 1.0));
  CHECK_THAT(fem.stiffness.diag[3], WithinRel(2.0 / h, 1e-14));
  CHECK_THAT(fem.stiffness.off[3], WithinRel(-1.0 / h, 1e-14));
  CHECK_THAT(fem.mass.diag[3], WithinRel(2.0 * h / 3.0, 1e-14));
  CHECK_THAT(fem.mass.off[3], WithinRel(h / 6.0, 1e-14));

  const Grid1D three(3.0, 3);
  const auto small = assemble_fem(three, CoefficientField::constant(three, 1.0));
  CHECK(small.stiffness.diag == std::vector<double>{2.0, 2.0});
  CHECK(small.stiffness.off == std::vector<double>{-1.0});

  const auto doubled = assemble_fem(grid, CoefficientField::constant(grid, 2.0));
  for (std::size_t i = 0; i < 9; ++i) {
    CHECK(doubled.stiffness.diag[i] == 2.0 * fem.stiffness.diag[i]);
    CHECK(doubled.mass.diag[i] == fem.mass.diag[i]);
  }
  auto bad = CoefficientField::constant(grid, 1.0);
  bad.midpoint_values[4] = -0.1;
  CHECK_THROWS_AS(assemble_fem(grid, bad), PreconditionError);
}

TEST_CASE("ellipticity check", "[eigensolver]") {
  const Grid1D grid(pi, 1000);
  // a = 1 + 0.5 sin x attains its minimum 1 at the endpoints
  const auto a = CoefficientField::from_function(grid, [](double x) { return 1.0 + 0.5 * std::sin(x); });
  // sampled at cell midpoints, so the minimum sits half a cell inside
  CHECK_THAT(ellipticity_check(a).lambda, WithinAbs(1.0 + 0.5 * std::sin(pi / 2000.0), 1e-12));
  CHECK(ellipticity_check(CoefficientField::constant(grid, 1.0)).lambda == 1.0);
  const Grid1D unit(1.0, 1000000);
  const auto ramp = CoefficientField::from_function(unit, [](double x) { return x; });
  const auto rep = ellipticity_check(ramp);
  CHECK(rep.lambda > 0.0);
  CHECK(rep.near_degenerate);
  CHECK_THROWS_AS(ellipticity_check(CoefficientField::from_function(grid, [](double x) { return std::cos(x); })),
                  PreconditionError);
}

TEST_CASE("generalized eigensolver accuracy", "[eigensolver]") {
  SECTION("a = 1 on (0, pi), 2000 cells") {
    const Grid1D grid(pi, 2000);
    const auto b = fem_interval_basis(grid, CoefficientField::constant(grid, 1.0), 10);
    for (std::size_t m = 1; m <= 10; ++m) {
      const double exact = static_cast<double>(m * m);
      CHECK(std::abs(b.eigenvalues[m - 1] - exact) / exact <= 1e-3);
      // matches the discrete closed form to near machine precision
      CHECK_THAT(b.eigenvalues[m - 1], WithinRel(p1_eigenvalue(m, pi, 2000), 1e-11));
      CHECK(b.modes[m - 1][1] > 0.0);
    }
    CHECK(gram_deviation(b) <= 1e-10);
  }
  SECTION("a = 1 on (0, 1), 1000 cells") {
    const Grid1D grid(1.0, 1000);
    const auto b = fem_interval_basis(grid, CoefficientField::constant(grid, 1.0), 1);
    CHECK_THAT(b.eigenvalues[0], WithinRel(pi * pi, 1e-3));
  }
  SECTION("single interior node") {
    const Grid1D grid(1.0, 2);
    const auto fem = assemble_fem(grid, CoefficientField::constant(grid, 1.0));
    const auto b = solve_generalized_eig(grid, fem, 1);
    CHECK_THAT(b.eigenvalues[0], WithinRel(fem.stiffness.diag[0] / fem.mass.diag[0], 1e-14));
  }
}

TEST_CASE("eigensolver errors", "[eigensolver]") {
  const Grid1D grid(1.0, 10);
  auto fem = assemble_fem(grid, CoefficientField::constant(grid, 1.0));
  CHECK_THROWS_AS(solve_generalized_eig(grid, fem, 10), PreconditionError);
  CHECK_THROWS_AS(solve_generalized_eig(grid, fem, 0), PreconditionError);
  fem.mass.off[2] = 10.0;  // mass no longer SPD
  CHECK_THROWS_AS(solve_generalized_eig(grid, fem, 2), PreconditionError);
}

TEST_CASE("variable-coefficient basis invariants", "[eigensolver][property]") {
  const Grid1D grid(pi, 800);
  const auto coeff = CoefficientField::from_function(grid, [](double x) { return 1.0 + 0.5 * std::sin(x); });
  const auto b = fem_interval_basis(grid, coeff, 64);
  REQUIRE(b.count() == 64);
  CHECK(gram_deviation(b) <= 1e-10);
  for (std::size_t m = 0; m < b.count(); ++m) {
    const auto phi = b.interior(m);
    // Rayleigh consistency and B-norm identity
    CHECK_THAT(b.stiffness.form(phi, phi) / b.mass.form(phi, phi), WithinRel(b.eigenvalues[m], 1e-12));
    CHECK_THAT(b_norm_check(b, m + 1), WithinRel(std::sqrt(b.eigenvalues[m]), 1e-8));
    CHECK(b.modes[m][1] > 0.0);
    if (m > 0) CHECK(b.eigenvalues[m] > b.eigenvalues[m - 1] * (1.0 + 1e-9));
    // residual of K phi = lambda M phi
    const auto kp = b.stiffness.multiply(phi);
    const auto mp = b.mass.multiply(phi);
    double r = 0.0, s = 0.0, k_norm = 0.0;
    for (std::size_t i = 0; i < kp.size(); ++i) {
      r = std::max(r, std::abs(kp[i] - b.eigenvalues[m] * mp[i]));
      s = std::max(s, std::abs(phi[i]));
      k_norm = std::max(k_norm, std::abs(b.stiffness.diag[i]) + 2.0 * std::abs(i < b.stiffness.off.size() ? b.stiffness.off[i] : 0.0));
    }
    CHECK(r <= 1e-12 * k_norm * s);
  }
}

TEST_CASE("b_norm_check", "[eigensolver]") {
  CHECK_THAT(b_norm_check(analytic_interval_basis(pi, 1.0, 3), 2), WithinRel(2.0, 1e-14));
  CHECK_THAT(b_norm_check(analytic_interval_basis(pi, 4.0, 3), 3), WithinRel(6.0, 1e-14));
  const Grid1D grid(pi, 2000);
  const auto b = fem_interval_basis(grid, CoefficientField::constant(grid, 1.0), 2);
  CHECK_THAT(b_norm_check(b, 1), WithinAbs(std::sqrt(b.eigenvalues[0]), 1e-6));
  CHECK_THROWS_AS(b_norm_check(b, 0), PreconditionError);
  CHECK_THROWS_AS(b_norm_check(b, 3), PreconditionError);
}

TEST_CASE("FEM eigenvalues decrease toward the exact ones at second order", "[eigensolver][convergence]") {
  std::vector<double> err;
  for (std::size_t cells : {100u, 200u, 400u, 800u}) {
    const Grid1D grid(pi, cells);
    const auto b = fem_interval_basis(grid, CoefficientField::constant(grid, 1.0), 3);
    err.push_back(b.eigenvalues[2] - 9.0);
    CHECK(err.back() > 0.0);
  }
  for (std::size_t k = 1; k < err.size(); ++k) {
    CHECK(err[k] < err[k - 1]);
    CHECK_THAT(std::log2(err[k - 1] / err[k]), WithinAbs(2.0, 0.05));
  }
}

TEST_CASE("coefficient fields from scattered samples", "[eigensolver]") {
  const Grid1D grid(2.0, 4);
  const std::vector<double> x{0.0, 1.0, 2.0};
  const std::vector<double> a{1.0, 3.0, 2.0};
  const auto c = CoefficientField::from_samples(grid, x, a);
  CHECK_THAT(c.midpoint_values[0], WithinAbs(1.5, 1e-14));
  CHECK_THAT(c.midpoint_values[1], WithinAbs(2.5, 1e-14));
  CHECK_THAT(c.midpoint_values[2], WithinAbs(2.75, 1e-14));
  CHECK_THAT(c.midpoint_values[3], WithinAbs(2.25, 1e-14));
}
