#include "contraction/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "contraction/models.hpp"

namespace contraction {

namespace {

void check_grid(double x_max, std::size_t n) {
  if (!(x_max > 0.0) || !std::isfinite(x_max)) throw std::invalid_argument("x_max must be > 0");
  if (n < 4) throw std::invalid_argument("eigenvalue grid needs at least 4 intervals");
}

// Solves (T - shift) x = rhs by the Thomas algorithm; rhs is overwritten.
void solve_shifted(const Tridiagonal& t, double shift, std::vector<double>& rhs) {
  const std::size_t m = t.diag.size();
  std::vector<double> c(m), d(m);
  const double tiny = std::numeric_limits<double>::min() * 1e10;
  double pivot = t.diag[0] - shift;
  if (std::abs(pivot) < tiny) pivot = tiny;
  c[0] = m > 1 ? t.off[0] / pivot : 0.0;
  d[0] = rhs[0] / pivot;
  for (std::size_t i = 1; i < m; ++i) {
    pivot = t.diag[i] - shift - t.off[i - 1] * c[i - 1];
    if (std::abs(pivot) < tiny) pivot = tiny;
    c[i] = i + 1 < m ? t.off[i] / pivot : 0.0;
    d[i] = (rhs[i] - t.off[i - 1] * d[i - 1]) / pivot;
  }
  rhs[m - 1] = d[m - 1];
  for (std::size_t i = m - 1; i-- > 0;) rhs[i] = d[i] - c[i] * rhs[i + 1];
}

double residual_norm(const Tridiagonal& t, double lambda) {
  const std::size_t m = t.diag.size();
  std::vector<double> v(m, 1.0);
  const double shift = lambda - 1e-9 * std::max(1.0, std::abs(lambda));
  for (int it = 0; it < 4; ++it) {
    solve_shifted(t, shift, v);
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;
  }
  double r2 = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    double av = t.diag[i] * v[i];
    if (i > 0) av += t.off[i - 1] * v[i - 1];
    if (i + 1 < m) av += t.off[i] * v[i + 1];
    const double r = av - lambda * v[i];
    r2 += r * r;
  }
  return std::sqrt(r2);
}

}  // namespace

std::vector<double> integrate_potential(const std::function<double(double)>& grad_U, double x_max,
                                        std::size_t n) {
  check_grid(x_max, n);
  const std::size_t m = 2 * n;
  const double half = x_max / static_cast<double>(m);
  std::vector<double> U(m + 1);
  U[0] = 0.0;
  double left = grad_U(0.0);
  for (std::size_t k = 0; k < m; ++k) {
    const double a = static_cast<double>(k) * half;
    const double mid = grad_U(a + 0.5 * half);
    const double right = grad_U(static_cast<double>(k + 1) * half);
    U[k + 1] = U[k] + half / 6.0 * (left + 4.0 * mid + right);
    left = right;
  }
  return U;
}

Tridiagonal assemble_dirichlet_operator(const std::function<double(double)>& grad_U, double x_max,
                                        std::size_t n) {
  const std::vector<double> U = integrate_potential(grad_U, x_max, n);
  const double h = x_max / static_cast<double>(n);
  const double scale = 1.0 / (2.0 * h * h);
  // Node i sits at U[2i], the midpoint i + 1/2 at U[2i + 1].
  Tridiagonal t;
  t.diag.resize(n - 1);
  t.off.resize(n - 2);
  for (std::size_t i = 1; i < n; ++i) {
    const double ui = U[2 * i];
    t.diag[i - 1] = scale * (std::exp(ui - U[2 * i - 1]) + std::exp(ui - U[2 * i + 1]));
    if (i + 1 < n) {
      t.off[i - 1] = -scale * std::exp(-U[2 * i + 1] + 0.5 * (ui + U[2 * i + 2]));
    }
  }
  return t;
}

std::size_t sturm_count(const Tridiagonal& t, double x) {
  std::size_t count = 0;
  double q = 1.0;
  const double tiny = std::numeric_limits<double>::min() * 1e10;
  for (std::size_t i = 0; i < t.diag.size(); ++i) {
    const double b2 = i == 0 ? 0.0 : t.off[i - 1] * t.off[i - 1];
    q = t.diag[i] - x - (i == 0 ? 0.0 : b2 / q);
    if (q == 0.0) q = -tiny;
    if (q < 0.0) ++count;
  }
  return count;
}

double lowest_eigenvalue(const Tridiagonal& t) {
  if (t.diag.empty()) throw std::invalid_argument("empty matrix");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < t.diag.size(); ++i) {
    const double radius = (i > 0 ? std::abs(t.off[i - 1]) : 0.0) +
                          (i < t.off.size() ? std::abs(t.off[i]) : 0.0);
    lo = std::min(lo, t.diag[i] - radius);
    hi = std::max(hi, t.diag[i] + radius);
  }
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (sturm_count(t, mid) >= 1) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return 0.5 * (lo + hi);
}

EigenResult dirichlet_lambda1(const std::function<double(double)>& grad_U, double x_max,
                              std::size_t n_grid, double rel_tol, int max_doublings) {
  check_grid(x_max, n_grid);
  std::size_t n = n_grid;
  Tridiagonal t = assemble_dirichlet_operator(grad_U, x_max, n);
  double previous = lowest_eigenvalue(t);
  double current = previous;
  for (int level = 1; level <= max_doublings; ++level) {
    n *= 2;
    t = assemble_dirichlet_operator(grad_U, x_max, n);
    current = lowest_eigenvalue(t);
    if (std::abs(current - previous) <= rel_tol * std::abs(current)) {
      EigenResult out;
      out.lambda1 = current;
      out.n_grid = n;
      out.x_max = x_max;
      out.residual = residual_norm(t, current);
      const std::vector<double> U = integrate_potential(grad_U, x_max, n);
      const double U_min = *std::min_element(U.begin(), U.end());
      out.boundary_weight = std::exp(-(U.back() - U_min));
      return out;
    }
    previous = current;
  }
  std::ostringstream msg;
  msg.precision(17);
  msg << "eigenvalue did not stabilise to relative " << rel_tol << "; last two iterates "
      << previous << " and " << current;
  throw EigenFailure(msg.str());
}

double rayleigh_quotient(const std::function<double(double)>& grad_U, double x_max, std::size_t n,
                         const std::function<double(double)>& trial) {
  const std::vector<double> U = integrate_potential(grad_U, x_max, n);
  const double h = x_max / static_cast<double>(n);
  const double U_min = *std::min_element(U.begin(), U.end());
  std::vector<double> v(n + 1);
  for (std::size_t i = 0; i <= n; ++i) v[i] = trial(static_cast<double>(i) * h);
  v.front() = 0.0;
  v.back() = 0.0;
  double energy = 0.0;
  double mass = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dv = (v[i + 1] - v[i]) / h;
    energy += 0.5 * dv * dv * std::exp(-(U[2 * i + 1] - U_min)) * h;
  }
  for (std::size_t i = 1; i < n; ++i) mass += v[i] * v[i] * std::exp(-(U[2 * i] - U_min)) * h;
  if (!(mass > 0.0)) throw std::invalid_argument("trial function vanishes on the grid");
  return energy / mass;
}

double doublewell_bound(double L, double R) {
  if (!(L >= 0.0) || !(R >= 0.0)) throw std::domain_error("double-well bound needs L, R >= 0");
  if (L * R * R < 4.0) {
    throw std::domain_error("double-well eigenvalue bound requires L R^2 >= 4");
  }
  return 0.75 * std::exp(0.5) * std::pow(L, 1.5) * R * std::exp(-L * R * R / 8.0);
}

std::function<double(double)> doublewell_potential(double L, double R, double ramp_width,
                                                   double K_out) {
  const DoubleWellPotential potential(L, R, ramp_width, K_out);
  return [potential](double x) { return potential.dU(x); };
}

}  // namespace contraction
