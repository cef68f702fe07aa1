#include "contraction/distance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

namespace contraction {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kMaxGridPoints = std::size_t{1} << 24;
constexpr int kGeometricLevels = 10;

double integral_s_times_linear(double a, double b, double u, double v) {
  return (b - a) / 6.0 * (a * (2.0 * u + v) + b * (u + 2.0 * v));
}

// h(R) = m(R) R (R - R0), nondecreasing on [R0, inf).
double r1_criterion(const CurvatureProfile& profile, double R0, double R) {
  return suffix_min_kappa(profile, R) * R * (R - R0);
}

// Grid on [0, r_max] through every mandatory point, every piece boundary
// and every sign change of kappa, with base spacing r_max / n and a
// geometric refinement towards 0.
std::vector<double> make_grid(const CurvatureProfile& profile, double r_max,
                              std::vector<double> mandatory, std::size_t n) {
  mandatory.push_back(0.0);
  mandatory.push_back(r_max);
  for (const auto& p : profile.pieces()) {
    if (p.a > 0.0 && p.a < r_max) mandatory.push_back(p.a);
    if (p.b == kInf) continue;
    if (p.b < r_max) mandatory.push_back(p.b);
    if ((p.ka < 0.0 && p.kb > 0.0) || (p.ka > 0.0 && p.kb < 0.0)) {
      const double cross = p.a + (p.b - p.a) * p.ka / (p.ka - p.kb);
      if (cross > 0.0 && cross < r_max) mandatory.push_back(cross);
    }
  }
  std::sort(mandatory.begin(), mandatory.end());
  const double merge_tol = 1e-13 * r_max;
  std::vector<double> breaks;
  for (double x : mandatory) {
    if (x < 0.0 || x > r_max) continue;
    if (breaks.empty() || x - breaks.back() > merge_tol) breaks.push_back(x);
  }
  if (r_max - breaks.back() > 0.0) breaks.back() = r_max;

  const double h = r_max / static_cast<double>(n);
  std::vector<double> grid;
  grid.reserve(n + 2 * breaks.size() + kGeometricLevels);
  grid.push_back(0.0);
  for (std::size_t s = 0; s + 1 < breaks.size(); ++s) {
    const double a = breaks[s];
    const double b = breaks[s + 1];
    const auto m = static_cast<std::size_t>(std::max(1.0, std::ceil((b - a) / h - 1e-9)));
    if (s == 0) {
      const double first = (b - a) / static_cast<double>(m);
      for (int k = kGeometricLevels; k >= 1; --k) {
        grid.push_back(first * std::ldexp(1.0, -k));
      }
    }
    for (std::size_t i = 1; i <= m; ++i) {
      grid.push_back(i == m ? b : a + (b - a) * static_cast<double>(i) / static_cast<double>(m));
    }
  }
  return grid;
}

struct Tabulation {
  std::vector<double> r;
  std::vector<double> phi;
  std::vector<double> Phi;
  std::vector<double> psi;  // cumulative int_0^r Phi / phi
};

Tabulation tabulate(const CurvatureProfile& profile, std::vector<double> grid) {
  const auto& pieces = profile.pieces();
  const std::size_t n = grid.size();
  Tabulation t;
  t.phi.resize(n);
  t.Phi.resize(n);
  t.psi.resize(n);
  double exponent = 0.0;
  std::size_t p = 0;
  t.phi[0] = 1.0;
  t.Phi[0] = 0.0;
  t.psi[0] = 0.0;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double a = grid[k];
    const double b = grid[k + 1];
    const double mid = 0.5 * (a + b);
    while (pieces[p].b < mid) ++p;
    const auto& piece = pieces[p];
    // Sign changes of kappa are grid points, so kappa^- is linear here.
    const double u = std::max(0.0, -piece.value(std::max(a, piece.a)));
    const double v = std::max(0.0, -piece.value(b));
    exponent += 0.25 * integral_s_times_linear(a, b, u, v);
    t.phi[k + 1] = std::exp(-exponent);
    t.Phi[k + 1] = t.Phi[k] + 0.5 * (b - a) * (t.phi[k] + t.phi[k + 1]);
    t.psi[k + 1] = t.psi[k] + 0.5 * (b - a) * (t.Phi[k] / t.phi[k] + t.Phi[k + 1] / t.phi[k + 1]);
  }
  t.r = std::move(grid);
  return t;
}

std::size_t nearest_index(const std::vector<double>& grid, double x) {
  const auto it = std::lower_bound(grid.begin(), grid.end(), x);
  if (it == grid.end()) return grid.size() - 1;
  const auto k = static_cast<std::size_t>(it - grid.begin());
  if (k > 0 && x - grid[k - 1] < grid[k] - x) return k - 1;
  return k;
}

// Linear interpolation of ys on the table grid; x inside [r_0, r_N].
double interpolate(const std::vector<double>& grid, const std::vector<double>& ys, double x) {
  if (x >= grid.back()) return ys.back();
  const auto it = std::upper_bound(grid.begin(), grid.end(), x);
  const auto k = static_cast<std::size_t>(it - grid.begin());
  const double a = grid[k - 1];
  const double b = grid[k];
  const double w = (x - a) / (b - a);
  return ys[k - 1] + w * (ys[k] - ys[k - 1]);
}

void fill_f(DistanceTable& table) {
  const std::size_t n = table.r.size();
  table.f_prime.resize(n);
  table.f.resize(n);
  for (std::size_t k = 0; k < n; ++k) table.f_prime[k] = table.phi[k] * table.g[k];
  table.f[0] = 0.0;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    table.f[k + 1] = table.f[k] + 0.5 * (table.r[k + 1] - table.r[k]) *
                                      (table.f_prime[k] + table.f_prime[k + 1]);
  }
}

template <class Evaluate>
auto refine(const QuadratureOptions& options, Evaluate evaluate) {
  if (options.n_grid < 64) {
    throw std::invalid_argument("quadrature needs n_grid >= 64");
  }
  std::size_t n = options.n_grid;
  auto current = evaluate(n);
  double previous_rate = current.second;
  for (int level = 1; level <= options.max_doublings; ++level) {
    n *= 2;
    if (n > kMaxGridPoints) break;
    current = evaluate(n);
    const double rate = current.second;
    if (std::abs(rate - previous_rate) <= options.rel_tol * std::abs(rate)) {
      return current;
    }
    previous_rate = rate;
  }
  std::ostringstream msg;
  msg.precision(17);
  msg << "quadrature did not converge to relative tolerance " << options.rel_tol
      << "; last two rate iterates " << previous_rate << " and " << current.second;
  throw QuadratureFailure(msg.str());
}

}  // namespace

double suffix_min_kappa(const CurvatureProfile& profile, double R) {
  double best = kInf;
  for (const auto& p : profile.pieces()) {
    if (p.b < R) continue;
    if (p.b == kInf) {
      best = std::min(best, p.ka);
      continue;
    }
    const double lo = std::max(R, p.a);
    best = std::min({best, p.value(lo), p.kb});
  }
  return best;
}

double compute_R0(const CurvatureProfile& profile) {
  if (!(profile.tail_value() > 0.0)) {
    throw InvalidProfile("R0 undefined: tail value is nonpositive");
  }
  const auto& pieces = profile.pieces();
  for (auto it = pieces.rbegin(); it != pieces.rend(); ++it) {
    const auto& p = *it;
    if (p.b == kInf) continue;
    if (p.ka >= 0.0 && p.kb >= 0.0) continue;
    if (p.kb < 0.0) return p.b;
    // ka < 0 <= kb: the linear piece reaches zero inside.
    return p.a + (p.b - p.a) * p.ka / (p.ka - p.kb);
  }
  return 0.0;
}

double compute_R1(const CurvatureProfile& profile, double R0) {
  if (!(profile.tail_value() > 0.0)) {
    throw InvalidProfile("R1 undefined: tail value is nonpositive");
  }
  std::vector<double> candidates;
  for (const auto& p : profile.pieces()) {
    if (p.a > R0) candidates.push_back(p.a);
    if (p.b != kInf && p.b > R0) candidates.push_back(p.b);
  }
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  double lo = R0;
  double hi = kInf;
  for (double x : candidates) {
    if (r1_criterion(profile, R0, x) >= 8.0) {
      hi = x;
      break;
    }
    lo = x;
  }
  if (hi == kInf) {
    // Beyond the last knot the suffix minimum is the tail value.
    const double tail = profile.tail_value();
    const double root = 0.5 * (R0 + std::sqrt(R0 * R0 + 32.0 / tail));
    return std::max(root, lo);
  }
  for (int iter = 0; iter < 300 && hi - lo > 1e-14 * std::max(1.0, hi); ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (r1_criterion(profile, R0, mid) >= 8.0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

double DistanceFunction::f(double r) const {
  if (!(r >= 0.0)) throw std::domain_error("f(r) requires r >= 0");
  if (r >= R1_) return f_R1_ + (r - R1_) * slope_beyond();
  return interpolate(table_.r, table_.f, r);
}

double DistanceFunction::f_prime(double r) const {
  if (!(r >= 0.0)) throw std::domain_error("f'(r) requires r >= 0");
  if (r >= R1_) return slope_beyond();
  return interpolate(table_.r, table_.f_prime, r);
}

DistanceFunction build_distance(const CurvatureProfile& profile, const QuadratureOptions& options) {
  require_valid(profile);
  const double R0 = compute_R0(profile);
  const double R1 = compute_R1(profile, R0);
  const double r_max = std::max(2.0 * R1, profile.last_knot_radius());
  const double alpha = profile.metric().alpha();

  auto evaluate = [&](std::size_t n) {
    Tabulation tab = tabulate(profile, make_grid(profile, r_max, {R0, R1}, n));
    const std::size_t i1 = nearest_index(tab.r, R1);
    const double integral = tab.psi[i1];
    return std::make_pair(std::move(tab), 1.0 / (alpha * integral));
  };
  auto [tab, rate] = refine(options, evaluate);

  DistanceFunction df(profile);
  df.R0_ = R0;
  df.R1_ = R1;
  df.rate_ = rate;
  const std::size_t i0 = nearest_index(tab.r, R0);
  const std::size_t i1 = nearest_index(tab.r, R1);
  df.phi_R0_ = tab.phi[i0];
  df.integral_ = tab.psi[i1];

  DistanceTable& table = df.table_;
  const std::size_t n = tab.r.size();
  table.g.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    table.g[k] = k >= i1 ? 0.5 : 1.0 - 0.5 * tab.psi[k] / df.integral_;
  }
  table.r = std::move(tab.r);
  table.phi = std::move(tab.phi);
  table.Phi = std::move(tab.Phi);
  fill_f(table);
  df.f_R1_ = table.f[i1];
  return df;
}

DistanceFunction build_distance(const CurvatureProfile& profile, std::size_t n_grid) {
  QuadratureOptions options;
  options.n_grid = n_grid;
  return build_distance(profile, options);
}

double eval_f(const DistanceFunction& df, double r) { return df.f(r); }
double eval_f_prime(const DistanceFunction& df, double r) { return df.f_prime(r); }

double LocalDistanceFunction::f(double r) const {
  if (!(r >= 0.0)) throw std::domain_error("f_R(r) requires r >= 0");
  if (r >= R_) return cap_;
  return interpolate(table_.r, table_.f, r);
}

double LocalDistanceFunction::f_prime(double r) const {
  if (!(r >= 0.0)) throw std::domain_error("f_R'(r) requires r >= 0");
  if (r >= R_) return 0.0;
  return interpolate(table_.r, table_.f_prime, r);
}

LocalDistanceFunction build_local_distance(const CurvatureProfile& profile, double R,
                                           const QuadratureOptions& options) {
  if (!(R > 0.0) || !std::isfinite(R)) {
    throw std::domain_error("local distance needs a finite radius R > 0");
  }
  const double alpha = profile.metric().alpha();
  auto evaluate = [&](std::size_t n) {
    Tabulation tab = tabulate(profile, make_grid(profile, R, {}, n));
    const double integral = tab.psi.back();
    return std::make_pair(std::move(tab), 1.0 / (alpha * integral));
  };
  auto [tab, rate] = refine(options, evaluate);

  LocalDistanceFunction local(profile);
  local.R_ = R;
  local.rate_ = rate;
  local.integral_ = tab.psi.back();
  DistanceTable& table = local.table_;
  const std::size_t n = tab.r.size();
  table.g.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    table.g[k] = k + 1 == n ? 0.0 : 1.0 - tab.psi[k] / local.integral_;
  }
  table.r = std::move(tab.r);
  table.phi = std::move(tab.phi);
  table.Phi = std::move(tab.Phi);
  fill_f(table);
  local.cap_ = table.f.back();
  return local;
}

LocalDistanceFunction build_local_distance(const CurvatureProfile& profile, double R,
                                           std::size_t n_grid) {
  QuadratureOptions options;
  options.n_grid = n_grid;
  return build_local_distance(profile, R, options);
}

double mixing_time_bound(const DistanceFunction& df, double eps) {
  if (!(eps > 0.0 && eps < 1.0)) {
    throw std::domain_error("mixing time bound needs 0 < eps < 1");
  }
  return std::log(2.0 / (eps * df.phi_R0())) / df.rate();
}

}  // namespace contraction
