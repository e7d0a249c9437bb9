#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include "wkbtd/berry.hpp"

using namespace wkbtd;
using cd = std::complex<double>;
using std::numbers::pi;

namespace {

Eigen::VectorXcd state(std::initializer_list<cd> c) {
  Eigen::VectorXcd v(static_cast<Eigen::Index>(c.size()));
  Eigen::Index i = 0;
  for (const auto& z : c) v(i++) = z;
  return v.normalized();
}

}  // namespace

TEST_CASE("constant loop has zero phase") {
  const auto s = state({cd(0.3, 0.1), cd(-0.2, 0.9), cd(0.4, 0.0)});
  const StateLoop loop(std::vector<Eigen::VectorXcd>(50, s));
  CHECK(discrete_berry_phase(loop) == 0.0);
  CHECK_FALSE(std::signbit(discrete_berry_phase(loop)));
}

TEST_CASE("real loops give zero or pi") {
  // (cos(a/2), sin(a/2)) around a full turn of a returns with a sign flip
  std::vector<Eigen::VectorXcd> flip, keep;
  for (int j = 0; j < 40; ++j) {
    const double a = 2.0 * pi * j / 40.0;
    flip.push_back(state({std::cos(a / 2.0), std::sin(a / 2.0)}));
    keep.push_back(state({std::cos(a), std::sin(a), 0.5}));
  }
  CHECK(discrete_berry_phase(StateLoop(flip)) == pi);
  CHECK(discrete_berry_phase(StateLoop(keep)) == 0.0);
}

TEST_CASE("two-level loop encloses half the solid angle") {
  const auto loop = sample_two_level_loop(pi / 2.0, 2000);
  const double gamma = discrete_berry_phase(loop);
  CHECK(std::abs(wrap_angle(gamma - pi * (1.0 - std::cos(pi / 2.0)))) <= 1e-3);
  // at theta = pi/2 the two orientations coincide mod 2 pi
  CHECK(std::abs(wrap_angle(gamma + pi * (1.0 - std::cos(pi / 2.0)))) <= 1e-3);

  const auto tilted = sample_two_level_loop(pi / 3.0, 2000);
  CHECK(std::abs(wrap_angle(discrete_berry_phase(tilted) - pi * 0.5)) <= 1e-3);
}

TEST_CASE("reversal flips the sign") {
  const auto loop = sample_two_level_loop(pi / 3.0, 400);
  CHECK(std::abs(wrap_angle(discrete_berry_phase(loop) + discrete_berry_phase(loop.reversed()))) <=
        1e-12);
}

TEST_CASE("random gauge leaves the phase unchanged") {
  const auto loop = sample_two_level_loop(1.1, 500);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> angle(-pi, pi);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<Eigen::VectorXcd> g;
    for (const auto& s : loop.states()) g.push_back(s * std::polar(1.0, angle(rng)));
    CHECK(std::abs(wrap_angle(discrete_berry_phase(StateLoop(g)) - discrete_berry_phase(loop))) <=
          1e-12);
  }
}

TEST_CASE("shrinking loop has vanishing phase") {
  CHECK(std::abs(discrete_berry_phase(sample_two_level_loop(1e-3, 100))) <= 1e-5);
}

TEST_CASE("discretization error falls as 1/K^2") {
  const double theta = 1.0;
  const double exact = pi * (1.0 - std::cos(theta));
  auto err = [&](int k) {
    return std::abs(wrap_angle(discrete_berry_phase(sample_two_level_loop(theta, k)) - exact));
  };
  CHECK(err(100) / err(200) == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("invalid loops") {
  const auto a = state({1.0, 0.0});
  const auto b = state({0.0, 1.0});
  CHECK_THROWS_AS(StateLoop({a}), ShapeError);
  CHECK_THROWS_AS(StateLoop({a, state({1.0, 0.0, 0.0})}), ShapeError);
  CHECK_THROWS_AS(StateLoop({a, Eigen::VectorXcd()}), ShapeError);
  Eigen::VectorXcd loose = a;
  loose(0) = 1.0 + 1e-9;
  CHECK_THROWS_AS(StateLoop({a, loose}), NumericError);
  CHECK_THROWS_AS(StateLoop({a, b}), UndersamplingError);
  CHECK_THROWS_AS(sample_two_level_loop(pi / 2.0, 4), ConfigError);
  CHECK_THROWS_AS(sample_two_level_loop(0.0, 100), ConfigError);
  CHECK_THROWS_AS(sample_two_level_loop(pi, 100), ConfigError);
}

TEST_CASE("wrap angle") {
  CHECK(wrap_angle(-pi) == pi);
  CHECK(wrap_angle(pi) == pi);
  CHECK(wrap_angle(3.0 * pi / 2.0) == doctest::Approx(-pi / 2.0));
  CHECK(wrap_angle(0.25) == 0.25);
}

TEST_CASE("loops load from JSON and CSV") {
  const auto loop = sample_two_level_loop(1.2, 32);
  const auto dir = std::filesystem::temp_directory_path() / "wkbtd_berry_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream csv(dir / "loop.csv");
    csv.precision(17);
    csv << "re0,im0,re1,im1\n";
    std::ofstream js(dir / "loop.json");
    js.precision(17);
    js << "{\"states\": [";
    for (Eigen::Index j = 0; j < loop.size(); ++j) {
      const auto& s = loop[j];
      csv << s(0).real() << ',' << s(0).imag() << ',' << s(1).real() << ',' << s(1).imag() << '\n';
      js << (j ? "," : "") << "[[" << s(0).real() << ',' << s(0).imag() << "],[" << s(1).real()
         << ',' << s(1).imag() << "]]";
    }
    js << "]}";
  }
  const double gamma = discrete_berry_phase(loop);
  CHECK(discrete_berry_phase(load_state_loop(dir / "loop.csv")) == doctest::Approx(gamma).epsilon(1e-13));
  CHECK(discrete_berry_phase(load_state_loop(dir / "loop.json")) == doctest::Approx(gamma).epsilon(1e-13));
  std::filesystem::remove_all(dir);
}
