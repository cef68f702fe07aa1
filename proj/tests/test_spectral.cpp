#include <doctest.h>

#include <cmath>

#include "contraction/models.hpp"
#include "contraction/spectral.hpp"
#include "oracles.hpp"

using namespace contraction;

TEST_CASE("OU Dirichlet eigenvalue") {
  // Odd eigenfunction v = x of the generator with U = K x^2 / 2.
  for (double K : {1.0, 2.0, 0.5}) {
    const auto res = dirichlet_lambda1([K](double x) { return K * x; }, 6.0 / std::sqrt(K));
    CHECK(res.lambda1 == doctest::Approx(K / 2.0).epsilon(1e-4));
    CHECK(res.residual < 1e-8);
    CHECK(res.boundary_weight == doctest::Approx(std::exp(-18.0)).epsilon(1e-6));
  }
}

TEST_CASE("tridiagonal operator against a dense solve") {
  const DoubleWellPotential pot(1.0, 4.0, 0.5, 1.0);
  const double x_max = pot.default_x_max();
  const int n = 800;
  const Tridiagonal t = assemble_dirichlet_operator([&](double x) { return pot.dU(x); }, x_max, n);
  CHECK(t.diag.size() == n - 1);
  CHECK(t.off.size() == n - 2);
  for (double o : t.off) CHECK(o < 0.0);
  const double dense = oracle::dense_lambda1([&](double x) { return pot.U(x); }, x_max, n);
  CHECK(lowest_eigenvalue(t) == doctest::Approx(dense).epsilon(1e-7));

  const Tridiagonal ou = assemble_dirichlet_operator([](double x) { return x; }, 5.0, n);
  CHECK(lowest_eigenvalue(ou) ==
        doctest::Approx(oracle::dense_lambda1([](double x) { return 0.5 * x * x; }, 5.0, n)).epsilon(1e-10));
}

TEST_CASE("Sturm count") {
  Tridiagonal t{{2.0, 2.0, 2.0}, {-1.0, -1.0}};
  // Eigenvalues 2 - sqrt 2, 2, 2 + sqrt 2.
  CHECK(sturm_count(t, 0.5) == 0);
  CHECK(sturm_count(t, 1.0) == 1);
  CHECK(sturm_count(t, 3.0) == 2);
  CHECK(sturm_count(t, 4.0) == 3);
  CHECK(lowest_eigenvalue(t) == doctest::Approx(2.0 - std::sqrt(2.0)).epsilon(1e-13));
}

TEST_CASE("potential integration") {
  const auto U = integrate_potential([](double x) { return 3.0 * x * x; }, 2.0, 10);
  CHECK(U.size() == 21);
  CHECK(U.front() == 0.0);
  CHECK(U.back() == doctest::Approx(8.0).epsilon(1e-14));
  CHECK(U[10] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("eigenvalue below Rayleigh quotients") {
  const DoubleWellPotential pot(1.0, 4.0, 0.5, 1.0);
  auto du = [&](double x) { return pot.dU(x); };
  const double x_max = pot.default_x_max();
  const std::size_t n = 2000;
  const double lambda = lowest_eigenvalue(assemble_dirichlet_operator(du, x_max, n));
  for (double s : {0.5, 1.0, 2.0}) {
    const double q = rayleigh_quotient(du, x_max, n, [s](double x) { return std::min(s * x, 1.0); });
    CHECK(lambda <= q * (1.0 + 1e-12));
  }
  CHECK(rayleigh_quotient([](double x) { return x; }, 8.0, n, [](double x) { return x; }) ==
        doctest::Approx(0.5).epsilon(1e-3));
}

TEST_CASE("larger domains lower the Dirichlet eigenvalue") {
  const DoubleWellPotential pot(1.0, 4.0, 0.5, 1.0);
  auto du = [&](double x) { return pot.dU(x); };
  double previous = std::numeric_limits<double>::infinity();
  for (double x_max : {3.0, 4.0, 6.0, 9.0}) {
    const double l = dirichlet_lambda1(du, x_max).lambda1;
    CHECK(l < previous * (1.0 + 1e-6));
    previous = l;
  }
}

TEST_CASE("double-well bound") {
  CHECK(doublewell_bound(1.0, 4.0) == doctest::Approx(3.0 * std::exp(-1.5)).epsilon(1e-15));
  CHECK(doublewell_bound(1.0, 4.0) == doctest::Approx(0.66938).epsilon(1e-5));
  CHECK(doublewell_bound(1.0, 2.0) == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(doublewell_bound(1.0, 6.0) == doctest::Approx(4.5 * std::exp(-4.0)).epsilon(1e-15));
  CHECK_THROWS_AS(doublewell_bound(1.0, 1.0), std::domain_error);
  const auto res = dirichlet_lambda1(doublewell_potential(1.0, 4.0, 0.5, 1.0),
                                     DoubleWellPotential(1.0, 4.0, 0.5, 1.0).default_x_max());
  CHECK(res.lambda1 < doublewell_bound(1.0, 4.0));
  CHECK(res.lambda1 > 0.0);
}

TEST_CASE("double-well potential shape") {
  const DoubleWellPotential pot(1.0, 4.0, 0.5, 2.0);
  CHECK(pot.d2U(0.0) == -1.0);
  CHECK(pot.d2U(1.99) == -1.0);
  CHECK(pot.d2U(2.25) == doctest::Approx(0.5));
  CHECK(pot.d2U(5.0) == 2.0);
  CHECK(pot.dU(0.0) == 0.0);
  CHECK(pot.dU(-3.0) == doctest::Approx(-pot.dU(3.0)));
  // First derivative matches the integral of the second.
  double acc = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) acc += pot.d2U((i + 0.5) * 4.0 / n) * 4.0 / n;
  CHECK(pot.dU(4.0) == doctest::Approx(acc).epsilon(1e-8));
  CHECK_THROWS(assemble_dirichlet_operator([](double x) { return x; }, 1.0, 2));
}
