#pragma once

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

namespace contraction {

struct EigenResult {
  double lambda1 = 0.0;
  std::size_t n_grid = 0;
  double x_max = 0.0;
  /// |S v - lambda v| / |v| for the symmetric discrete operator S.
  double residual = 0.0;
  /// exp(-(U(x_max) - min U)), the relative weight left at the cut.
  double boundary_weight = 0.0;
};

class EigenFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Symmetric tridiagonal matrix given by its diagonal and off-diagonal.
struct Tridiagonal {
  std::vector<double> diag;
  std::vector<double> off;
};

/// Potential U(x) = int_0^x grad_U on the half-step grid k x_max / (2 n),
/// k = 0..2n, by composite Simpson on each half step.
std::vector<double> integrate_potential(const std::function<double(double)>& grad_U, double x_max,
                                        std::size_t n);

/// Symmetrized discretization of -(1/2) e^U (e^{-U} v')' on (0, x_max) with
/// v(0) = v(x_max) = 0 and n intervals (n - 1 unknowns).
Tridiagonal assemble_dirichlet_operator(const std::function<double(double)>& grad_U, double x_max,
                                        std::size_t n);

/// Number of eigenvalues strictly below x (Sturm sequence count).
std::size_t sturm_count(const Tridiagonal& t, double x);
/// Smallest eigenvalue by Sturm bisection.
double lowest_eigenvalue(const Tridiagonal& t);

/// Smallest eigenvalue at n_grid intervals, doubled until the relative
/// change is below rel_tol.
EigenResult dirichlet_lambda1(const std::function<double(double)>& grad_U, double x_max,
                              std::size_t n_grid = 2000, double rel_tol = 1e-6,
                              int max_doublings = 12);

/// Discrete weighted Rayleigh quotient of trial(x) on the same grid, with the
/// trial values forced to 0 at both ends.
double rayleigh_quotient(const std::function<double(double)>& grad_U, double x_max, std::size_t n,
                         const std::function<double(double)>& trial);

/// 3/4 e^{1/2} L^{3/2} R exp(-L R^2 / 8); requires L R^2 >= 4.
double doublewell_bound(double L, double R);

std::function<double(double)> doublewell_potential(double L, double R, double ramp_width,
                                                   double K_out);

}  // namespace contraction
