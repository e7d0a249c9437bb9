#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "wkbtd/hj.hpp"

using namespace wkbtd;

TEST_CASE("free phase is linear") {
  const SpaceTimeGrid g(-1.0, 1.0, 41, 1.0, 5);
  const auto phase = build_phase(PotentialSpec::free(), 1.0, 2.0, g, 0.0);
  for (Index i = 0; i < g.nx(); ++i) CHECK(phase.w_grid()(i) == doctest::Approx(2.0 * g.x(i)).epsilon(1e-13));
  CHECK(phase.sx(0.3) == 2.0);
  CHECK(phase.sxx(0.3) == 0.0);
  CHECK(hj_residual(phase, PotentialSpec::free()) == 0.0);
  CHECK(phase.travel_time(0.4) == doctest::Approx(0.2).epsilon(1e-13));
}

TEST_CASE("harmonic W against closed form") {
  const SpaceTimeGrid g(-0.9, 0.9, 201, 1.0, 5);
  const auto spec = PotentialSpec::harmonic(1.0);
  const auto phase = build_phase(spec, 1.0, 1.0, g, 0.0, 0.19);
  double err = 0.0;
  for (Index i = 0; i < g.nx(); ++i)
    err = std::max(err, std::abs(phase.w_grid()(i) - oracle::harmonic_w(1.0, 1.0, g.x(i), 0.0)));
  CHECK(err <= 1e-10);
  // independent Simpson quadrature of sqrt(2(1 - x^2)) at x = 0.5
  const double simpson = oracle::simpson([](double y) { return std::sqrt(2.0 * (1.0 - y * y)); },
                                         0.0, 0.5, 2000);
  CHECK(phase.w(0.5) == doctest::Approx(simpson).epsilon(1e-11));
  CHECK(phase.w(0.0) == 0.0);
  CHECK(hj_residual(phase, spec) <= 1e-12);
}

TEST_CASE("W vanishes at the anchor for any parameters") {
  const SpaceTimeGrid g(-0.5, 0.7, 61, 1.0, 5);
  for (double m : {0.5, 1.0, 3.0}) {
    const auto phase = build_phase(PotentialSpec::harmonic(2.0), m, 1.5, g, 0.13);
    CHECK(phase.w(0.13) == 0.0);
    CHECK(phase.anchor() == 0.13);
  }
}

TEST_CASE("S_xx matches the closed form") {
  const SpaceTimeGrid g(-0.5, 0.5, 11, 1.0, 5);
  const auto spec = PotentialSpec::polynomial({0.1, 0.2, 0.3});
  const auto phase = build_phase(spec, 2.0, 1.0, g);
  for (double x : {-0.4, 0.0, 0.35}) {
    const double sx = std::sqrt(2.0 * 2.0 * (1.0 - eval_potential(spec, x)));
    CHECK(phase.sx(x) == doctest::Approx(sx).epsilon(1e-14));
    CHECK(phase.sxx(x) == doctest::Approx(-2.0 * eval_potential_derivative(spec, x) / sx).epsilon(1e-14));
  }
}

TEST_CASE("beta shift shows up in the residual") {
  const SpaceTimeGrid g(-0.9, 0.9, 201, 1.0, 5);
  const auto spec = PotentialSpec::harmonic(1.0);
  const auto phase = build_phase(spec, 1.0, 1.0, g, 0.0, 0.19);
  CHECK(hj_residual(phase.with_beta(1.1), spec) == doctest::Approx(0.1).epsilon(1e-10));
}

TEST_CASE("phase construction errors") {
  const auto spec = PotentialSpec::harmonic(1.0);
  CHECK_THROWS_AS(build_phase(spec, 1.0, 1.0, SpaceTimeGrid(-1.0, 1.0, 21, 1.0, 5)), DomainError);
  CHECK_THROWS_AS(build_phase(spec, 0.0, 1.0, SpaceTimeGrid(-0.5, 0.5, 21, 1.0, 5)), ConfigError);
  CHECK_THROWS_AS(build_phase(spec, 1.0, 1.0, SpaceTimeGrid(-0.5, 0.5, 21, 1.0, 5), 0.8),
                  ConfigError);
}

TEST_CASE("phase invariants on a polynomial well") {
  const SpaceTimeGrid g(-0.6, 0.6, 121, 1.0, 5);
  const auto spec = PotentialSpec::polynomial({0.0, 0.3, 1.0, 0.0, 0.5});
  const double m = 1.5, beta = 1.2;
  const auto phase = build_phase(spec, m, beta, g);
  for (Index i = 0; i < g.nx(); ++i) {
    const double x = g.x(i);
    const double sx = phase.sx(x);
    CHECK(std::abs(sx * sx - 2.0 * m * (beta - eval_potential(spec, x))) <= 1e-12 * (1.0 + 2.0 * m * beta));
    CHECK(std::abs(2.0 * sx * phase.sxx(x) + 2.0 * m * eval_potential_derivative(spec, x)) <= 1e-10);
    if (i > 0) CHECK(phase.w_grid()(i) > phase.w_grid()(i - 1));
  }
}

TEST_CASE("differenced W approaches S_x at second order") {
  const auto spec = PotentialSpec::harmonic(1.0);
  auto err = [&](Index n) {
    const SpaceTimeGrid g(-0.8, 0.8, n, 1.0, 5);
    const auto phase = build_phase(spec, 1.0, 1.0, g, 0.0, 0.1);
    double e = 0.0;
    for (Index i = 1; i + 1 < n; ++i)
      e = std::max(e, std::abs((phase.w_grid()(i + 1) - phase.w_grid()(i - 1)) / (2.0 * g.hx()) -
                               phase.sx(g.x(i))));
    return e;
  };
  CHECK(err(41) / err(81) == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("allowed window keeps the margin") {
  const auto spec = PotentialSpec::polynomial({0.2, -0.4, 1.0, 0.3});
  const double beta = 1.0, delta = 0.3;
  const auto w = allowed_window(spec, beta, delta, {-3.0, 3.0});
  for (int j = 0; j <= 400; ++j) {
    const double x = w.lo + w.width() * j / 400.0;
    CHECK(beta - eval_potential(spec, x) >= delta - 1e-10 * beta);
  }
}
