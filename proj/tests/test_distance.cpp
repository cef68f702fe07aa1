#include <doctest.h>

#include <cmath>
#include <random>

#include "contraction/distance.hpp"
#include "oracles.hpp"

using namespace contraction;

TEST_CASE("R0 and R1") {
  CHECK(compute_R0(CurvatureProfile::constant(1.0)) == 0.0);
  const auto minorant = profile_from_bounds(1.0, 1.0, 1.0);
  CHECK(compute_R0(minorant) == 1.0);
  const CurvatureProfile lin({{1.0, -2.0}, {2.0, 0.0}, {3.0, 5.0}}, 5.0);
  CHECK(compute_R0(lin) == doctest::Approx(2.0).epsilon(1e-14));

  CHECK(compute_R1(CurvatureProfile::constant(1.0), 0.0) == doctest::Approx(std::sqrt(8.0)).epsilon(1e-12));
  CHECK(compute_R1(CurvatureProfile::constant(2.0), 0.0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(compute_R1(minorant, 1.0) == doctest::Approx((1.0 + std::sqrt(33.0)) / 2.0).epsilon(1e-12));
  // kappa touching 0 beyond R0 is legal.
  const CurvatureProfile touch({{1.0, -1.0}, {2.0, 0.0}, {3.0, 0.0}, {4.0, 1.0}}, 1.0);
  CHECK(compute_R0(touch) == doctest::Approx(2.0));
}

TEST_CASE("constant curvature closed forms") {
  for (double K : {0.5, 1.0, 2.0, 4.0}) {
    const auto df = build_distance(CurvatureProfile::constant(K));
    CHECK(df.rate() == doctest::Approx(K / 4.0).epsilon(1e-8));
    CHECK(df.R1() == doctest::Approx(std::sqrt(8.0 / K)).epsilon(1e-10));
    CHECK(df.R0() == 0.0);
    CHECK(df.phi_R0() == 1.0);
  }
  const auto df = build_distance(CurvatureProfile::constant(1.0));
  CHECK(eval_f(df, 1.0) == doctest::Approx(1.0 - 1.0 / 48.0).epsilon(1e-7));
  CHECK(eval_f(df, 0.0) == 0.0);
  CHECK(eval_f_prime(df, 0.0) == 1.0);
  CHECK(eval_f_prime(df, df.R1()) == doctest::Approx(0.5).epsilon(1e-12));
  const double R1 = std::sqrt(8.0);
  const double f_R1 = R1 - R1 * R1 * R1 / (6.0 * R1 * R1);
  CHECK(eval_f(df, 10.0) == doctest::Approx(f_R1 + (10.0 - R1) / 2.0).epsilon(1e-7));
  CHECK_THROWS_AS(eval_f(df, -1e-9), std::domain_error);
  CHECK_THROWS_AS(build_distance(CurvatureProfile::constant(1.0), 32), std::invalid_argument);
}

TEST_CASE("minorant rate against the closed-form oracle") {
  for (auto [R, L, K] : {std::tuple{1.0, 1.0, 1.0}, {2.0, 3.0, 0.5}, {4.0, 1.0, 1.0}, {0.5, 8.0, 2.0}}) {
    const auto p = profile_from_bounds(R, L, K);
    const auto df = build_distance(p);
    const double R1 = oracle::minorant_R1(R, L, K);
    CHECK(df.R1() == doctest::Approx(R1).epsilon(1e-12));
    CHECK(1.0 / df.rate() == doctest::Approx(oracle::minorant_inverse_rate(R, L, R1)).epsilon(1e-8));
    CHECK(df.phi_R0() == doctest::Approx(std::exp(-L * R * R / 8.0)).epsilon(1e-12));
  }
  const auto df = build_distance(profile_from_bounds(1.0, 1.0, 1.0));
  CHECK(df.rate() >= 0.0797);
}

TEST_CASE("mixing time bound") {
  const auto df = build_distance(CurvatureProfile::constant(1.0));
  CHECK(mixing_time_bound(df, 0.1) == doctest::Approx(4.0 * std::log(20.0)).epsilon(1e-8));
  CHECK_THROWS_AS(mixing_time_bound(df, 0.0), std::domain_error);
  CHECK_THROWS_AS(mixing_time_bound(df, 1.0), std::domain_error);
  const auto dm = build_distance(profile_from_bounds(1.0, 1.0, 1.0));
  CHECK(mixing_time_bound(dm, 0.1) ==
        doctest::Approx(std::log(20.0 / std::exp(-0.125)) / dm.rate()).epsilon(1e-12));
}

TEST_CASE("local distance") {
  // g_R = 1 - r^2 for kappa = 0 and R = 1, so f_R = r - r^3/3.
  const auto local = build_local_distance(CurvatureProfile::constant(0.0), 1.0);
  CHECK(local.rate() == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(local.cap() == doctest::Approx(2.0 / 3.0).epsilon(1e-7));
  for (double r : {0.1, 0.4, 0.9}) CHECK(local.f(r) == doctest::Approx(r - r * r * r / 3.0).epsilon(1e-6));
  CHECK(local.f(3.0) == local.cap());
  CHECK(local.f_prime(2.0) == 0.0);
  for (double R : {0.5, 2.0, 7.0}) {
    CHECK(1.0 / build_local_distance(CurvatureProfile::constant(0.0), R).rate() ==
          doctest::Approx(R * R / 2.0).epsilon(1e-8));
  }
  CHECK_THROWS_AS(build_local_distance(CurvatureProfile::constant(0.0), 0.0), std::domain_error);
}

TEST_CASE("local rate at R1 equals the global rate; decreasing in R") {
  const auto p = profile_from_bounds(2.0, 1.0, 1.0);
  const auto df = build_distance(p);
  CHECK(build_local_distance(p, df.R1()).rate() == doctest::Approx(df.rate()).epsilon(1e-7));
  double previous = std::numeric_limits<double>::infinity();
  for (double R : {0.5, 1.0, 2.0, 3.0, 5.0}) {
    const double c = build_local_distance(p, R).rate();
    CHECK(c < previous);
    previous = c;
  }
}

TEST_CASE("monotonicity in kappa") {
  std::mt19937_64 gen(7);
  for (int trial = 0; trial < 10; ++trial) {
    const auto hi = oracle::random_profile(gen);
    std::vector<Knot> knots(hi.knots().begin(), hi.knots().end());
    for (auto& k : knots) k.kappa -= 0.5;
    const CurvatureProfile lo(knots, hi.tail_value() * 0.5);
    const auto a = build_distance(lo);
    const auto b = build_distance(hi);
    CHECK(a.R0() >= b.R0());
    CHECK(a.R1() >= b.R1() - 1e-12);
    CHECK(a.rate() <= b.rate() * (1.0 + 1e-8));
  }
}

TEST_CASE("table invariants") {
  const auto df = build_distance(profile_from_bounds(3.0, 1.0, 2.0));
  const auto& t = df.table();
  CHECK(t.r.front() == 0.0);
  CHECK(t.phi.front() == 1.0);
  CHECK(t.g.front() == 1.0);
  CHECK(t.f.front() == 0.0);
  for (std::size_t k = 1; k < t.size(); ++k) {
    CHECK(t.r[k] > t.r[k - 1]);
    CHECK(t.phi[k] <= t.phi[k - 1]);
    CHECK(t.g[k] <= t.g[k - 1]);
    CHECK(t.f[k] > t.f[k - 1]);
    CHECK(t.g[k] >= 0.5 - 1e-15);
    CHECK(t.f[k] <= t.Phi[k] * (1.0 + 1e-12));
    CHECK(t.f[k] >= 0.5 * t.Phi[k] * (1.0 - 1e-12));
    if (t.r[k] >= df.R1()) CHECK(t.g[k] == doctest::Approx(0.5));
    if (t.r[k] >= df.R0()) CHECK(t.phi[k] == doctest::Approx(df.phi_R0()).epsilon(1e-14));
  }
}
