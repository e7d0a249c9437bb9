#include <doctest.h>

#include <cmath>

#include "wkbtd/model.hpp"

using namespace wkbtd;

TEST_CASE("potential values") {
  CHECK(eval_potential(PotentialSpec::free(), 3.7) == 0.0);
  CHECK(eval_potential(PotentialSpec::harmonic(1.0), 2.0) == 4.0);
  CHECK(eval_potential(PotentialSpec::harmonic(0.5), 2.0) == 2.0);
  CHECK(eval_potential(PotentialSpec::polynomial({0, 0, 1, 1}), 2.0) == 12.0);
}

TEST_CASE("potential derivatives") {
  CHECK(eval_potential_derivative(PotentialSpec::harmonic(1.0), 2.0) == 4.0);
  CHECK(eval_potential_derivative(PotentialSpec::free(), -1.3) == 0.0);
  CHECK(eval_potential_derivative(PotentialSpec::polynomial({0, 0, 1, 1}), 1.0) == 5.0);
}

TEST_CASE("tabulated potential converges at fourth order") {
  auto max_err = [](int n) {
    std::vector<double> x(n), v(n);
    for (int i = 0; i < n; ++i) {
      x[i] = -1.0 + 2.0 * i / (n - 1);
      v[i] = std::sin(2.0 * x[i]);
    }
    const auto spec = PotentialSpec::tabulated(x, v);
    double e = 0.0;
    for (int j = 0; j <= 997; ++j) {
      const double y = -1.0 + 2.0 * j / 997.0;
      e = std::max(e, std::abs(eval_potential(spec, y) - std::sin(2.0 * y)));
    }
    return e;
  };
  const double ratio = max_err(41) / max_err(81);
  CHECK(ratio > 12.0);
  CHECK(ratio < 20.0);
}

TEST_CASE("tabulated potential passes through its samples and rejects outside points") {
  const std::vector<double> x{0.0, 0.5, 1.0, 1.5, 2.0};
  const std::vector<double> v{1.0, 0.2, -0.3, 0.4, 2.0};
  const auto spec = PotentialSpec::tabulated(x, v);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(eval_potential(spec, x[i]) == doctest::Approx(v[i]).epsilon(1e-14));
  CHECK_THROWS_AS(eval_potential(spec, 2.1), RangeError);
  CHECK_THROWS_AS(eval_potential_derivative(spec, -0.1), RangeError);
  // RangeError is a DomainError
  CHECK_THROWS_AS(eval_potential(spec, -1.0), DomainError);
}

TEST_CASE("invalid potentials") {
  CHECK_THROWS_AS(PotentialSpec::tabulated({0, 1, 2}, {0, 1, 2}), ConfigError);
  CHECK_THROWS_AS(PotentialSpec::tabulated({0, 1, 1, 2}, {0, 1, 2, 3}), ConfigError);
  CHECK_THROWS_AS(PotentialSpec::tabulated({0, 1, 2, 3}, {0, NAN, 2, 3}), ConfigError);
  CHECK_THROWS_AS(PotentialSpec::polynomial({}), ConfigError);
  CHECK_THROWS_AS(PotentialSpec::harmonic(INFINITY), ConfigError);
}

TEST_CASE("allowed window") {
  const auto w = allowed_window(PotentialSpec::harmonic(1.0), 1.0, 0.19, {-2.0, 2.0});
  CHECK(w.lo == doctest::Approx(-0.9).epsilon(1e-12));
  CHECK(w.hi == doctest::Approx(0.9).epsilon(1e-12));

  const auto f = allowed_window(PotentialSpec::free(), 1.0, 0.5, {-1.0, 1.0});
  CHECK(f.lo == -1.0);
  CHECK(f.hi == 1.0);

  CHECK_THROWS_AS(allowed_window(PotentialSpec::harmonic(1.0), 1.0, 2.0, {-2.0, 2.0}),
                  DomainError);
}

TEST_CASE("allowed window picks the longest component") {
  // V = x^4 - x^2 dips below zero on two wells separated by a bump at 0
  const auto spec = PotentialSpec::polynomial({0.1, 0.0, -1.0, 0.0, 1.0});
  const auto w = allowed_window(spec, 0.0, 0.01, {-2.0, 2.0});
  CHECK(w.hi - w.lo > 0.0);
  CHECK(eval_potential(spec, w.center()) < 0.0);
  CHECK((w.lo > 0.0 || w.hi < 0.0));
  const auto c = allowed_component(spec, 0.0, 0.01, {-2.0, 2.0}, -0.7);
  CHECK(c.hi < 0.0);
  CHECK(c.contains(-0.7));
}

TEST_CASE("space-time grid") {
  const SpaceTimeGrid g(-1.0, 1.0, 21, 0.5, 11);
  CHECK(g.hx() == doctest::Approx(0.1));
  CHECK(g.ht() == doctest::Approx(0.05));
  CHECK(g.x(20) == 1.0);
  CHECK(g.t(10) == 0.5);
  const auto e = g.extended(3, 2);
  CHECK(e.nx() == 26);
  CHECK(g.offset_in(e) == 3);
  CHECK(e.offset_in(g) == -1);
  CHECK_THROWS_AS(SpaceTimeGrid(0.0, 1.0, 4, 1.0, 5), ConfigError);
}

TEST_CASE("initial profiles") {
  const auto g = InitialProfile::gaussian(0.5, 2.0);
  CHECK(g.value(0.5) == 1.0);
  CHECK(g.value(2.5) == doctest::Approx(std::exp(-0.5)));
  CHECK(g.d1(0.5) == 0.0);
  CHECK(g.d2(0.5) == doctest::Approx(-0.25));
  CHECK_THROWS_AS(InitialProfile::gaussian(0.0, 0.0), ConfigError);
  CHECK_THROWS_AS(InitialProfile::gaussian(NAN, 1.0), ConfigError);
  const auto c = InitialProfile::constant(3.0);
  CHECK(c.value(-7.0) == 3.0);
  CHECK(c.d1(1.0) == 0.0);
  CHECK(c.d2(1.0) == 0.0);
}

TEST_CASE("amplitude field shape checks") {
  const SpaceTimeGrid g(0.0, 1.0, 9, 1.0, 6);
  CHECK_THROWS_AS(AmplitudeField(0, g, Eigen::ArrayXXd::Zero(6, 9)), ShapeError);
  Eigen::ArrayXXd bad = Eigen::ArrayXXd::Zero(9, 6);
  bad(2, 2) = NAN;
  CHECK_THROWS_AS(AmplitudeField(0, g, bad), NumericError);
  Eigen::ArrayXXd v(9, 6);
  for (Index i = 0; i < 9; ++i)
    for (Index n = 0; n < 6; ++n) v(i, n) = 10.0 * i + n;
  const AmplitudeField f(1, g, v);
  const SpaceTimeGrid inner(0.25, 0.75, 5, 1.0, 6);
  const auto sub = f.restrict_to(inner);
  CHECK(sub(0, 3) == 23.0);
  CHECK(sub(4, 0) == 60.0);
}
