#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "wkbtd/multidim.hpp"

using namespace wkbtd;

namespace {

const PotentialSpec kFree = PotentialSpec::free();
const PotentialSpec kHarmonic = PotentialSpec::harmonic(1.0);

GridD grid2(double t_hi = 0.1, Index nt = 41) {
  return GridD({SpaceTimeGrid(0.1, 0.6, 41, t_hi, nt), SpaceTimeGrid(-0.3, 0.3, 41, t_hi, nt)});
}

// 2-D free: a0 = prod c_i phi_i(u_i), a1 = t Lap a0 / 2m
struct FreeProduct {
  double m = 1.0;
  double beta[2] = {1.0, 1.0};
  double x0[2] = {0.0, 0.0};
  double w[2] = {0.4, 0.3};

  double p(int a) const { return std::sqrt(2.0 * m * beta[a]); }
  double u(int a, double x, double t) const { return t - m * (x - x0[a]) / p(a); }
  double factor(int a, double x, double t) const {
    return oracle::gaussian(u(a, x, t), 0.0, w[a]) / std::sqrt(p(a));
  }
  double factor_xx(int a, double x, double t) const {
    return oracle::gaussian_d2(u(a, x, t), 0.0, w[a]) / std::sqrt(p(a)) * (m / p(a)) * (m / p(a));
  }
  double lap_a0(double x, double y, double t) const {
    return factor_xx(0, x, t) * factor(1, y, t) + factor(0, x, t) * factor_xx(1, y, t);
  }
  double a1(double x, double y, double t) const { return t * lap_a0(x, y, t) / (2.0 * m); }
};

double max_abs(const Eigen::ArrayXd& a) { return a.abs().maxCoeff(); }

}  // namespace

TEST_CASE("grid layout") {
  const GridD g = grid2();
  CHECK(g.dims() == 2);
  CHECK(g.spatial_size() == 41 * 41);
  CHECK(g.stride(0) == 1);
  CHECK(g.stride(1) == 41);
  CHECK(g.stride(2) == 41 * 41);
  const auto idx = g.unflatten(3 + 41 * 7);
  CHECK(idx[0] == 3);
  CHECK(idx[1] == 7);
  CHECK_THROWS(GridD({}));
  CHECK_THROWS(GridD(std::vector<SpaceTimeGrid>(4, SpaceTimeGrid(0, 1, 5, 1, 5))));
  CHECK_THROWS_AS(GridD({SpaceTimeGrid(0, 1, 5, 1, 5), SpaceTimeGrid(0, 1, 5, 1, 6)}), ShapeError);
}

TEST_CASE("2-D free phase") {
  const GridD g({SpaceTimeGrid(-1, 1, 21, 1, 5), SpaceTimeGrid(-1, 1, 21, 1, 5)});
  const auto phase = build_phase_d({kFree, kFree}, 1.0, {1.0, 1.0}, g, kDefaultMargin, {0.0, 0.0});
  CHECK(phase.beta() == 2.0);
  for (double x : {-0.5, 0.25})
    for (double y : {-0.75, 0.5})
      for (double t : {0.0, 0.3})
        CHECK(phase.axis(0).w(x) + phase.axis(1).w(y) - phase.beta() * t ==
              doctest::Approx(std::sqrt(2.0) * (x + y) - 2.0 * t).epsilon(1e-13));
  CHECK(hj_residual_d(phase) <= 1e-15);
}

TEST_CASE("harmonic times free phase") {
  const GridD g = grid2();
  const auto phase = build_phase_d({kHarmonic, kFree}, 1.0, {1.0, 1.0}, g, 0.19);
  CHECK(hj_residual_d(phase) <= 1e-12);
}

TEST_CASE("axis errors name the axis") {
  const GridD g({SpaceTimeGrid(-0.5, 0.5, 11, 1, 5), SpaceTimeGrid(-1.5, 1.5, 11, 1, 5)});
  try {
    build_phase_d({kFree, kHarmonic}, 1.0, {1.0, 1.0}, g);
    FAIL("expected a domain error");
  } catch (const DomainError& e) {
    CHECK(std::string(e.what()).find("axis 1") != std::string::npos);
  }
}

TEST_CASE("one axis reproduces the 1-D solver") {
  const SpaceTimeGrid g1(-0.2, 0.5, 41, 0.1, 41);
  const auto phase = build_phase(kHarmonic, 1.0, 1.0, g1, 0.0, 0.19);
  const auto phi = InitialProfile::gaussian(0.0, 0.5);
  const auto f1 = solve_hierarchy(phase, phi, g1, 2);
  const auto fd = solve_hierarchy_d(SeparablePhaseD({phase}), {phi}, GridD({g1}), 2);
  for (int k = 0; k <= 2; ++k) {
    const Eigen::Map<const Eigen::ArrayXd> flat(f1[k].values().data(), f1[k].values().size());
    CHECK(max_abs(fd[k].values() - flat) <= 1e-12 * std::max(1.0, max_abs(flat)));
  }
}

TEST_CASE("swapping axes transposes the fields") {
  const SpaceTimeGrid gx(0.1, 0.6, 21, 0.1, 21);
  const SpaceTimeGrid gy(-0.3, 0.3, 25, 0.1, 21);
  const auto px = InitialProfile::gaussian(0.0, 0.5);
  const auto py = InitialProfile::gaussian(0.1, 0.3);
  const GridD a({gx, gy});
  const GridD b({gy, gx});
  const auto fa = solve_hierarchy_d(build_phase_d({kHarmonic, kFree}, 1.0, {1.0, 1.0}, a, 0.19),
                                    {px, py}, a, 1);
  const auto fb = solve_hierarchy_d(build_phase_d({kFree, kHarmonic}, 1.0, {1.0, 1.0}, b, 0.19),
                                    {py, px}, b, 1);
  for (int k = 0; k <= 1; ++k) {
    double dev = 0.0;
    for (Index n = 0; n < a.nt(); ++n)
      for (Index j = 0; j < gy.nx(); ++j)
        for (Index i = 0; i < gx.nx(); ++i)
          dev = std::max(dev, std::abs(fa[k].values()(i + j * gx.nx() + n * a.spatial_size()) -
                                       fb[k].values()(j + i * gy.nx() + n * b.spatial_size())));
    CHECK(dev <= 1e-12 * std::max(1.0, max_abs(fa[k].values())));
  }
}

TEST_CASE("zero profile on one axis zeroes every order") {
  const GridD g = grid2();
  const auto phase = build_phase_d({kHarmonic, kFree}, 1.0, {1.0, 1.0}, g, 0.19);
  const auto f = solve_hierarchy_d(phase, {InitialProfile::gaussian(), InitialProfile::constant(0.0)}, g, 2);
  for (const auto& a : f) CHECK(max_abs(a.values()) == 0.0);
}

TEST_CASE("product a0 solves the d-dimensional equation") {
  const GridD g = grid2();
  const auto phase = build_phase_d({kHarmonic, kFree}, 1.0, {1.0, 1.0}, g, 0.19);
  const std::vector<AmplitudeFieldD> f{
      solve_a0_d(phase, {InitialProfile::gaussian(0.0, 0.5), InitialProfile::gaussian(0.0, 0.5)}, g)};
  CHECK(transport_residual_d(phase, f)[0] <= 1e-8);
}

TEST_CASE("2-D free a1 against closed form and method of lines") {
  const FreeProduct fp;
  const GridD g({SpaceTimeGrid(0.0, 0.6, 41, 0.1, 41), SpaceTimeGrid(0.0, 0.6, 41, 0.1, 41)});
  const auto phase = build_phase_d({kFree, kFree}, 1.0, {1.0, 1.0}, g, kDefaultMargin, {0.0, 0.0});
  const auto f = solve_hierarchy_d(
      phase, {InitialProfile::gaussian(0.0, fp.w[0]), InitialProfile::gaussian(0.0, fp.w[1])}, g, 1);
  const auto& ax = g.axis(0);
  const auto& ay = g.axis(1);

  double err = 0.0, scale = 0.0;
  for (Index n = 0; n < g.nt(); ++n) {
    for (Index j = 0; j < ay.nx(); ++j) {
      for (Index i = 0; i < ax.nx(); ++i) {
        const double ref = fp.a1(ax.x(i), ay.x(j), g.t(n));
        err = std::max(err, std::abs(f[1].values()(i + j * ax.nx() + n * g.spatial_size()) - ref));
        scale = std::max(scale, std::abs(ref));
      }
    }
  }
  CHECK(err / scale <= 1e-6);

  const auto mol = oracle::mol_free_2d(
      fp.p(0) / fp.m, fp.p(1) / fp.m, ax.x_lo(), ax.hx(), static_cast<int>(ax.nx()), ay.x_lo(),
      ay.hx(), static_cast<int>(ay.nx()), g.ht(), static_cast<int>(g.nt()), 2,
      [&](double x, double y, double t) { return fp.lap_a0(x, y, t) / (2.0 * fp.m); },
      [&](double x, double y, double t) { return fp.a1(x, y, t); });
  double dev = 0.0;
  for (std::size_t q = 0; q < mol.size(); ++q) dev = std::max(dev, std::abs(mol[q] - f[1].values()(q)));
  CHECK(dev / scale <= 1e-4);
}

TEST_CASE("remainder identity and order slope in 2-D") {
  const GridD g = grid2();
  const auto phase = build_phase_d({kHarmonic, kFree}, 1.0, {1.0, 1.0}, g, 0.19);
  const auto f = solve_hierarchy_d(
      phase, {InitialProfile::gaussian(0.0, 0.5), InitialProfile::gaussian(0.0, 0.5)}, g, 1);
  const auto rep0 = residual_order_sweep_d(phase, {f[0]}, {0.2, 0.1, 0.05, 0.025});
  CHECK(rep0.passed());
  CHECK(rep0.slope == doctest::Approx(2.0).epsilon(0.075));
  const auto rep1 = residual_order_sweep_d(phase, f, {0.2, 0.1, 0.05, 0.025});
  CHECK(rep1.passed());
  CHECK(rep1.slope == doctest::Approx(3.0).epsilon(0.05));
  CHECK(remainder_identity_d(SeriesWavefunctionD(phase, f, 0.05)) <= 1e-6);
}

TEST_CASE("2-D free product identity") {
  const GridD g({SpaceTimeGrid(0.0, 0.6, 41, 0.1, 41), SpaceTimeGrid(0.0, 0.6, 41, 0.1, 41)});
  const auto phase = build_phase_d({kFree, kFree}, 1.0, {1.0, 1.0}, g, kDefaultMargin, {0.0, 0.0});
  const auto f = solve_hierarchy_d(
      phase, {InitialProfile::gaussian(0.0, 0.4), InitialProfile::gaussian(0.0, 0.3)}, g, 1);
  for (int n = 0; n <= 1; ++n) {
    const std::vector<AmplitudeFieldD> sub(f.begin(), f.begin() + n + 1);
    CHECK(remainder_identity_d(SeriesWavefunctionD(phase, sub, 0.05)) <= 1e-6);
  }
}

TEST_CASE("harmonic top coefficient leaves no remainder") {
  const GridD g({SpaceTimeGrid(0.0, 0.6, 21, 0.1, 11), SpaceTimeGrid(0.0, 0.6, 21, 0.1, 11)});
  const auto phase = build_phase_d({kFree, kFree}, 1.0, {1.0, 1.0}, g);
  Eigen::ArrayXd v(g.size());
  for (Index q = 0; q < g.size(); ++q) {
    const auto idx = g.unflatten(q % g.spatial_size());
    const double x = g.axis(0).x(idx[0]), y = g.axis(1).x(idx[1]);
    v(q) = x * x - y * y + 2.0;
  }
  const SeriesWavefunctionD psi(phase, {AmplitudeFieldD(0, g, v)}, 0.1);
  CHECK(max_abs(predicted_remainder_d(psi).abs()) <= 1e-9);
}

TEST_CASE("multi-D order limit") {
  const GridD g = grid2();
  const auto phase = build_phase_d({kHarmonic, kFree}, 1.0, {1.0, 1.0}, g, 0.19);
  CHECK_THROWS_AS(solve_hierarchy_d(phase, {InitialProfile::gaussian(), InitialProfile::gaussian()}, g, 3),
                  ConfigError);
}

TEST_CASE("continuity in 2-D") {
  auto res = [](Index n) {
    const GridD g({SpaceTimeGrid(0.1, 0.6, n, 0.1, n), SpaceTimeGrid(-0.3, 0.3, n, 0.1, n)});
    const auto phase = build_phase_d({kHarmonic, kFree}, 1.0, {1.0, 1.0}, g, 0.19);
    return continuity_residual_d(
        phase, solve_a0_d(phase, {InitialProfile::gaussian(0.0, 0.5), InitialProfile::gaussian(0.0, 0.5)}, g));
  };
  CHECK(res(21) / res(41) == doctest::Approx(4.0).epsilon(0.125));
}
