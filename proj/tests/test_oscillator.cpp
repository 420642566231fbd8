#include "catch_amalgamated.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "wavedecay/oscillator.hpp"

using namespace wavedecay;
using namespace wavedecay::oscillator;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

constexpr double pi = std::numbers::pi;

SampledSignal exp_forcing(double dt = 1e-3, double T = 40.0) {
  return SampledSignal::from_function([](double t) { return std::exp(-t); }, dt,
                                      static_cast<std::size_t>(std::llround(T / dt)),
                                      TailPolicy::exponential(1.0, 1.0));
}

// f = 1 on [0, pi], 0 afterwards, on a grid that does not contain pi.
SampledSignal boxcar_forcing(double dt = 1e-3, double T = 30.0) {
  return SampledSignal::from_function([](double t) { return t <= pi ? 1.0 : 0.0; }, dt,
                                      static_cast<std::size_t>(std::llround(T / dt)), TailPolicy::compact(pi));
}

SampledSignal zero_forcing(double dt = 1e-2, double T = 10.0) {
  return SampledSignal::from_function([](double) { return 0.0; }, dt, static_cast<std::size_t>(std::llround(T / dt)),
                                      TailPolicy::compact(0.0));
}

std::vector<double> linspace(double a, double b, std::size_t n) {
  std::vector<double> t(n);
  for (std::size_t k = 0; k < n; ++k) t[k] = a + (b - a) * static_cast<double>(k) / static_cast<double>(n - 1);
  return t;
}

}  // namespace

TEST_CASE("sine/cosine transforms against antiderivative closed forms", "[oscillator]") {
  SECTION("f = e^{-s}, mu = 1") {
    const auto tr = sine_cosine_transforms(exp_forcing(), 1.0);
    CHECK_THAT(tr.sine_inf, WithinAbs(0.5, 1e-7));
    CHECK_THAT(tr.cosine_inf, WithinAbs(0.5, 1e-7));
    CHECK(tr.tail_bound_rigorous);
    CHECK(tr.tail_bound == std::exp(-40.0));
    // running values: int_0^t e^{-s} sin s ds
    const double t = 2.0;
    CHECK_THAT(tr.sine[2000], WithinAbs(0.5 * (1.0 - std::exp(-t) * (std::sin(t) + std::cos(t))), 1e-12));
  }
  SECTION("f = 0") {
    const auto tr = sine_cosine_transforms(zero_forcing(), 1.0);
    CHECK(tr.sine_inf == 0.0);
    CHECK(tr.cosine_inf == 0.0);
    CHECK(tr.tail_bound == 0.0);
  }
  SECTION("f = boxcar on [0, pi]") {
    const auto tr = sine_cosine_transforms(boxcar_forcing(), 1.0);
    CHECK_THAT(tr.sine_inf, WithinAbs(2.0, 1e-9));
    CHECK_THAT(tr.cosine_inf, WithinAbs(0.0, 1e-9));
    CHECK(tr.tail_bound == 0.0);
  }
}

TEST_CASE("transforms reject invalid input", "[oscillator]") {
  CHECK_THROWS_AS(sine_cosine_transforms(exp_forcing(0.1, 5.0), 0.0), PreconditionError);
  CHECK_THROWS_AS(sine_cosine_transforms(exp_forcing(0.1, 5.0), -1.0), PreconditionError);
  CHECK_THROWS_AS(SampledSignal({0.0, 0.2, 0.1}, {1.0, 1.0, 1.0}), PreconditionError);
  CHECK_THROWS_AS(SampledSignal({0.1, 0.2}, {1.0, 1.0}), PreconditionError);
  CHECK_THROWS_AS(SampledSignal({0.0, 0.1, 0.2}, {1.0, 0.0, 1.0}, TailPolicy::compact(0.05)), PreconditionError);
}

TEST_CASE("decay initial conditions", "[oscillator]") {
  const auto a = decay_initial_conditions(exp_forcing(), 1.0);
  CHECK_THAT(a.y0, WithinAbs(0.5, 1e-7));
  CHECK_THAT(a.v0, WithinAbs(-0.5, 1e-7));

  const auto b = decay_initial_conditions(boxcar_forcing(), 1.0);
  CHECK_THAT(b.y0, WithinAbs(2.0, 1e-9));
  CHECK_THAT(b.v0, WithinAbs(0.0, 1e-9));

  const auto c = decay_initial_conditions(zero_forcing(), 3.0);
  CHECK(c.y0 == 0.0);
  CHECK(c.v0 == 0.0);
}

TEST_CASE("decay initial conditions refuse an inadmissible tail", "[oscillator]") {
  // e^{-s} cut at T = 5 leaves a tail e^{-5} ~ 6.7e-3 > 1e-8
  CHECK_THROWS_AS(decay_initial_conditions(exp_forcing(1e-2, 5.0), 1.0), PreconditionError);
  // An undecayed constant forcing has a large heuristic tail
  const auto flat = SampledSignal::from_function([](double) { return 1.0; }, 0.01, 1000, TailPolicy::truncate());
  bool rigorous = true;
  CHECK(tail_estimate(flat, 1.0, &rigorous) > 1.0);
  CHECK_FALSE(rigorous);
  CHECK_THROWS_AS(decay_initial_conditions(flat, 1.0), PreconditionError);
}

TEST_CASE("solve_ivp reproduces closed-form solutions", "[oscillator]") {
  SECTION("y = e^{-t}/2") {
    const OscillatorScenario sc{1.0, exp_forcing(), 0.5, -0.5};
    const auto t = linspace(0.0, 20.0, 4001);
    const auto traj = solve_ivp(sc, t);
    for (std::size_t k = 0; k < t.size(); ++k) {
      REQUIRE_THAT(traj.y[k], WithinAbs(0.5 * std::exp(-t[k]), 1e-6));
      REQUIRE_THAT(traj.yprime[k], WithinAbs(-0.5 * std::exp(-t[k]), 1e-6));
    }
  }
  SECTION("boxcar: y = 1 + cos t, then 0") {
    const OscillatorScenario sc{1.0, boxcar_forcing(), 2.0, 0.0};
    const auto t = linspace(0.0, 30.0, 3001);
    const auto traj = solve_ivp(sc, t);
    for (std::size_t k = 0; k < t.size(); ++k) {
      const double expected = t[k] <= pi ? 1.0 + std::cos(t[k]) : 0.0;
      REQUIRE_THAT(traj.y[k], WithinAbs(expected, 1e-8));
    }
  }
  SECTION("homogeneous: y = cos 2t") {
    const OscillatorScenario sc{2.0, zero_forcing(), 1.0, 0.0};
    const auto t = linspace(0.0, 10.0, 501);
    const auto traj = solve_ivp(sc, t);
    for (std::size_t k = 0; k < t.size(); ++k) {
      REQUIRE_THAT(traj.y[k], WithinAbs(std::cos(2.0 * t[k]), 1e-14));
      REQUIRE_THAT(traj.yprime[k], WithinAbs(-2.0 * std::sin(2.0 * t[k]), 1e-13));
    }
  }
  SECTION("initial velocity is reproduced exactly at t = 0") {
    const OscillatorScenario sc{1.7, exp_forcing(0.01, 40.0), 0.3, -0.9};
    const std::vector<double> t0{0.0};
    const auto traj = solve_ivp(sc, t0);
    CHECK(traj.y[0] == 0.3);
    CHECK(traj.yprime[0] == -0.9);
  }
}

TEST_CASE("solve_ivp refuses evaluation past a non-compact window", "[oscillator]") {
  const OscillatorScenario sc{1.0, exp_forcing(0.01, 10.0), 0.0, 0.0};
  const std::vector<double> t{0.0, 11.0};
  CHECK_THROWS_AS(solve_ivp(sc, t), PreconditionError);
  // compact support extends to arbitrary times
  const OscillatorScenario box{1.0, boxcar_forcing(0.01, 5.0), 2.0, 0.0};
  const std::vector<double> far{100.0};
  CHECK_THAT(solve_ivp(box, far).y[0], WithinAbs(0.0, 1e-7));
}

TEST_CASE("tail amplitude", "[oscillator]") {
  CHECK(tail_amplitude(OscillatorScenario{1.0, exp_forcing(), 0.5, -0.5}) <= 1e-7);
  CHECK_THAT(tail_amplitude(OscillatorScenario{1.0, exp_forcing(), 0.6, -0.5}), WithinAbs(0.1, 1e-6));
  CHECK(tail_amplitude(OscillatorScenario{1.0, zero_forcing(), 0.0, 0.0}) == 0.0);
}

TEST_CASE("residual check", "[oscillator]") {
  SECTION("e^{-t}/2 at dt = 1e-3") {
    const OscillatorScenario sc{1.0, exp_forcing(), 0.5, -0.5};
    std::vector<double> t(sc.forcing.times().begin(), sc.forcing.times().begin() + 20001);
    CHECK(residual_check(solve_ivp(sc, t), sc) <= 1e-4);
  }
  SECTION("zero") {
    const OscillatorScenario sc{1.0, zero_forcing(), 0.0, 0.0};
    const auto t = linspace(0.0, 10.0, 101);
    CHECK(residual_check(solve_ivp(sc, t), sc) == 0.0);
  }
  SECTION("cos 2t at dt = 1e-3") {
    const OscillatorScenario sc{2.0, zero_forcing(), 1.0, 0.0};
    const auto t = linspace(0.0, 10.0, 10001);
    CHECK(residual_check(solve_ivp(sc, t), sc) <= 1e-5);
  }
  SECTION("too few nodes") {
    const OscillatorScenario sc{2.0, zero_forcing(), 1.0, 0.0};
    const std::vector<double> t{0.0, 0.1};
    CHECK_THROWS_AS(residual_check(solve_ivp(sc, t), sc), PreconditionError);
  }
}

TEST_CASE("residual check converges at second order", "[oscillator][convergence]") {
  std::vector<double> res;
  for (int level = 0; level < 4; ++level) {
    const double dt = 0.05 / static_cast<double>(1 << level);
    const OscillatorScenario sc{1.0, exp_forcing(dt, 40.0), 0.5, -0.5};
    std::vector<double> t(sc.forcing.times().begin(), sc.forcing.times().end());
    res.push_back(residual_check(solve_ivp(sc, t), sc));
  }
  for (std::size_t k = 1; k < res.size(); ++k) CHECK(std::log2(res[k - 1] / res[k]) >= 1.9);
}

TEST_CASE("solutions are linear in forcing and initial data", "[oscillator][property]") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  const double dt = 0.01;
  const std::size_t n = 1000;
  for (int trial = 0; trial < 20; ++trial) {
    const double mu = 0.5 + std::abs(u(rng));
    const double w1 = u(rng), w2 = u(rng), alpha = u(rng), beta = u(rng);
    const double y1 = u(rng), v1 = u(rng), y2 = u(rng), v2 = u(rng);
    auto f1 = [&](double t) { return std::sin(w1 * t) * std::exp(-0.3 * t); };
    auto f2 = [&](double t) { return std::cos(w2 * t) / (1.0 + t); };
    const auto s1 = SampledSignal::from_function(f1, dt, n);
    const auto s2 = SampledSignal::from_function(f2, dt, n);
    const auto s12 = SampledSignal::from_function([&](double t) { return alpha * f1(t) + beta * f2(t); }, dt, n);
    const auto t = linspace(0.0, 10.0, 257);
    const auto a = solve_ivp(OscillatorScenario{mu, s1, y1, v1}, t);
    const auto b = solve_ivp(OscillatorScenario{mu, s2, y2, v2}, t);
    const auto c = solve_ivp(OscillatorScenario{mu, s12, alpha * y1 + beta * y2, alpha * v1 + beta * v2}, t);
    for (std::size_t k = 0; k < t.size(); ++k) {
      const double expected = alpha * a.y[k] + beta * b.y[k];
      const double scale = std::abs(alpha * a.y[k]) + std::abs(beta * b.y[k]) + 1e-300;
      REQUIRE(std::abs(c.y[k] - expected) <= 1e-12 * std::max(scale, 1.0));
    }
  }
}

TEST_CASE("dichotomy: persistent amplitude equals the tail amplitude", "[oscillator][property]") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const auto f = boxcar_forcing(1e-3, 30.0);
  for (int trial = 0; trial < 10; ++trial) {
    const double mu = 0.7 + 1.5 * std::abs(u(rng));
    const auto iv = decay_initial_conditions(f, mu);
    const OscillatorScenario sc{mu, f, iv.y0 + 0.3 * u(rng), iv.v0 + 0.3 * u(rng)};
    const double A = tail_amplitude(sc);
    const auto t = linspace(10.0, 10.0 + 2.0 * pi / mu, 2001);
    const auto traj = solve_ivp(sc, t);
    double sup = 0.0;
    for (double y : traj.y) sup = std::max(sup, std::abs(y));
    CHECK(sup >= 0.9 * A);
    CHECK(sup <= 1.1 * A);
    // decay data have zero amplitude and vanishing tail
    const OscillatorScenario decaying{mu, f, iv.y0, iv.v0};
    CHECK(tail_amplitude(decaying) <= 1e-12);
    for (double y : solve_ivp(decaying, t).y) REQUIRE(std::abs(y) <= 1e-12);
  }
}

TEST_CASE("uniqueness: near-decaying solutions stay close", "[oscillator][property]") {
  const auto f = exp_forcing(1e-3, 40.0);
  const auto iv = decay_initial_conditions(f, 1.3);
  const double eps = 1e-4;
  const OscillatorScenario a{1.3, f, iv.y0 + eps / 2, iv.v0};
  const OscillatorScenario b{1.3, f, iv.y0, iv.v0 - 1.3 * eps / 2};
  REQUIRE(tail_amplitude(a) <= eps);
  REQUIRE(tail_amplitude(b) <= eps);
  const auto t = linspace(0.0, 40.0, 4001);
  const auto ya = solve_ivp(a, t), yb = solve_ivp(b, t);
  for (std::size_t k = 0; k < t.size(); ++k) REQUIRE(std::abs(ya.y[k] - yb.y[k]) <= 2 * eps + 1e-8);
}
