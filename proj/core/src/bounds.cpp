#include "contraction/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace contraction {

namespace {

void require_nonnegative(double x, const char* name) {
  if (!(x >= 0.0) || !std::isfinite(x)) {
    throw std::domain_error(std::string(name) + " must be finite and >= 0");
  }
}

void require_positive(double x, const char* name) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw std::domain_error(std::string(name) + " must be finite and > 0");
  }
}

// sup over (0, delta) of r kappa(r)^- for one piece, clipped to [lo, hi].
double piece_sup_r_kappa_minus(const ProfilePiece& p, double lo, double hi) {
  auto value = [&](double r) { return r * std::max(0.0, -p.value(r)); };
  double best = std::max(value(lo), value(hi));
  if (p.b != std::numeric_limits<double>::infinity() && p.b > p.a) {
    const double slope = (p.kb - p.ka) / (p.b - p.a);
    if (slope > 0.0) {
      // -r (ka + slope (r - a)) peaks at r = (slope a - ka) / (2 slope).
      const double vertex = (slope * p.a - p.ka) / (2.0 * slope);
      if (vertex > lo && vertex < hi) best = std::max(best, value(vertex));
    }
  }
  return best;
}

}  // namespace

std::string to_string(LemmaCase c) {
  switch (c) {
    case LemmaCase::convex: return "convex";
    case LemmaCase::mild_nonconvex: return "mild_nonconvex";
    case LemmaCase::deep_nonconvex: return "deep_nonconvex";
  }
  return "unknown";
}

RateBound lemma_rate_bound(double R, double L, double K, double alpha) {
  if (!(K > 0.0) || !std::isfinite(K)) throw std::domain_error("lemma bound needs K > 0");
  require_nonnegative(R, "R");
  require_nonnegative(L, "L");
  require_positive(alpha, "alpha");
  RateBound out;
  out.R = R;
  out.L = L;
  out.K = K;
  out.alpha = alpha;
  const double e = std::numbers::e;
  if (L == 0.0 || R == 0.0) {
    out.case_tag = LemmaCase::convex;
    out.inverse = 2.0 * std::max(R * R, 2.0 / K);
  } else if (L * R * R <= 8.0) {
    out.case_tag = LemmaCase::mild_nonconvex;
    out.inverse = 0.5 * (e - 1.0) * R * R + e * std::sqrt(8.0 / K) * R + 4.0 / K;
  } else {
    out.case_tag = LemmaCase::deep_nonconvex;
    const double s2pi = std::sqrt(2.0 * std::numbers::pi);
    out.inverse = 8.0 * s2pi / R / std::sqrt(L) * (1.0 / L + 1.0 / K) * std::exp(L * R * R / 8.0) +
                  32.0 / (R * R * K * K);
  }
  out.value = 1.0 / (alpha * out.inverse);
  return out;
}

double perturbation_bounded(double c0, double R, double sup_gamma) {
  require_nonnegative(c0, "c0");
  require_nonnegative(R, "R");
  require_nonnegative(sup_gamma, "sup_gamma");
  if (R == 0.0) return c0;
  return c0 * std::exp(-R * sup_gamma);
}

double perturbation_lipschitz(double c0, double R, double L_pert) {
  require_nonnegative(c0, "c0");
  require_nonnegative(R, "R");
  require_nonnegative(L_pert, "L_pert");
  return c0 * std::exp(-L_pert * R * R / 4.0);
}

ProductRate product_rate(std::span<const double> c, std::span<const double> eps,
                         std::span<const double> phi_R0, std::span<const double> w) {
  const std::size_t n = c.size();
  if (n == 0 || eps.size() != n || phi_R0.size() != n || w.size() != n) {
    throw std::invalid_argument("product_rate needs equally sized, non-empty inputs");
  }
  double rate = std::numeric_limits<double>::infinity();
  double min_pw = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    if (!(w[i] > 0.0 && w[i] <= 1.0)) throw std::domain_error("weights must lie in (0, 1]");
    if (!(phi_R0[i] > 0.0 && phi_R0[i] <= 1.0)) throw std::domain_error("phi(R0) must lie in (0, 1]");
    if (!(eps[i] >= 0.0)) throw std::domain_error("eps_i must be >= 0");
    if (!(eps[i] < c[i])) {
      throw std::domain_error("no contraction certified: eps_" + std::to_string(i) +
                              " >= c_" + std::to_string(i));
    }
    rate = std::min(rate, c[i] - eps[i]);
    min_pw = std::min(min_pw, phi_R0[i] * w[i]);
  }
  return {rate, 2.0 / min_pw, true};
}

ProductRate perturbed_product_rate(std::span<const double> c, std::span<const double> phi_R0,
                                   double lambda) {
  require_nonnegative(lambda, "lambda");
  if (c.empty() || phi_R0.size() != c.size()) {
    throw std::invalid_argument("perturbed_product_rate needs equally sized, non-empty inputs");
  }
  double rate = std::numeric_limits<double>::infinity();
  double max_inv = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (!(phi_R0[i] > 0.0)) throw std::domain_error("phi(R0) must be > 0");
    rate = std::min(rate, c[i] - 2.0 * lambda / phi_R0[i]);
    max_inv = std::max(max_inv, 1.0 / phi_R0[i]);
  }
  return {rate, 2.0 * max_inv, rate > 0.0};
}

std::string to_string(InteractionKind kind) {
  switch (kind) {
    case InteractionKind::mean_field: return "mean-field";
    case InteractionKind::nearest_neighbour: return "nearest-neighbour";
    case InteractionKind::general: return "general";
  }
  return "unknown";
}

InteractionKind parse_interaction_kind(const std::string& text) {
  if (text == "mean-field") return InteractionKind::mean_field;
  if (text == "nearest-neighbour") return InteractionKind::nearest_neighbour;
  if (text == "general") return InteractionKind::general;
  throw std::invalid_argument("unknown interaction kind '" + text + "'");
}

InteractionMatrix::InteractionMatrix(Eigen::MatrixXd entries, InteractionKind kind, double a)
    : entries_(std::move(entries)), kind_(kind), coupling_alpha_(a) {}

InteractionMatrix InteractionMatrix::mean_field(std::size_t n, double a) {
  if (n == 0) throw std::invalid_argument("interaction matrix needs n >= 1");
  const auto m = static_cast<Eigen::Index>(n);
  return InteractionMatrix(Eigen::MatrixXd::Constant(m, m, a / static_cast<double>(n)),
                           InteractionKind::mean_field, a);
}

InteractionMatrix InteractionMatrix::nearest_neighbour(std::size_t n, double a) {
  if (n < 2) throw std::invalid_argument("nearest-neighbour interaction needs n >= 2");
  const auto m = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd entries = Eigen::MatrixXd::Zero(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    entries(i, (i + 1) % m) = a / 2.0;
    entries(i, (i + m - 1) % m) = a / 2.0;
  }
  return InteractionMatrix(std::move(entries), InteractionKind::nearest_neighbour, a);
}

InteractionMatrix InteractionMatrix::general(Eigen::MatrixXd entries) {
  if (entries.rows() == 0 || entries.rows() != entries.cols()) {
    throw std::invalid_argument("interaction matrix must be square and non-empty");
  }
  if (!entries.allFinite()) throw std::invalid_argument("interaction matrix must be finite");
  return InteractionMatrix(std::move(entries), InteractionKind::general, 0.0);
}

double InteractionMatrix::max_row_column_sum() const {
  const Eigen::MatrixXd abs = entries_.cwiseAbs();
  const Eigen::VectorXd sums = abs.rowwise().sum() + abs.colwise().sum().transpose();
  return sums.maxCoeff();
}

InteractingRate interacting_rate(double base_c, double phi_R0, double M,
                                 const InteractionMatrix& a) {
  require_nonnegative(M, "M");
  require_positive(phi_R0, "phi(R0)");
  InteractingRate out;
  const double sum = a.max_row_column_sum();
  out.lambda = M * sum;
  const double c[] = {base_c};
  const double phi[] = {phi_R0};
  const ProductRate pr = perturbed_product_rate(c, phi, out.lambda);
  out.rate = pr.rate;
  out.A = pr.A;
  out.certified = pr.certified;
  out.condition_holds = M == 0.0 || sum <= base_c * phi_R0 / M;
  return out;
}

double interaction_theta(double M, double phi_R0) {
  require_nonnegative(M, "M");
  require_positive(phi_R0, "phi(R0)");
  return 4.0 * M / phi_R0;
}

double stationary_variance_bound(double c, double lip_norm) {
  require_positive(c, "c");
  require_nonnegative(lip_norm, "Lipschitz norm");
  return lip_norm * lip_norm / (2.0 * c);
}

double correlation_bound(double t, double s, double c, double lip_g, double lip_h) {
  require_nonnegative(t, "t");
  require_nonnegative(s, "s");
  require_positive(c, "c");
  require_nonnegative(lip_g, "Lipschitz norm of g");
  require_nonnegative(lip_h, "Lipschitz norm of h");
  return -std::expm1(-2.0 * c * t) / (2.0 * c) * std::exp(-c * s) * lip_g * lip_h;
}

ErgodicBounds ergodic_average_bounds(double t, double c, double lip_g, double moment_d_f) {
  require_positive(t, "t");
  require_positive(c, "c");
  require_nonnegative(lip_g, "Lipschitz norm");
  require_nonnegative(moment_d_f, "moment of d_f");
  ErgodicBounds out;
  out.bias = -std::expm1(-c * t) / (c * t) * lip_g * moment_d_f;
  out.variance = lip_g * lip_g / (c * c * t);
  return out;
}

double heat_eq_K(std::size_t d, double L) {
  if (d < 2) throw std::domain_error("heat equation needs d >= 2");
  const double dd = static_cast<double>(d);
  return 2.0 * dd * dd * (1.0 - std::cos(std::numbers::pi / dd)) - L;
}

HeatEqRate heat_eq_rate_from_K(double K_d, double R) {
  require_positive(R, "R");
  HeatEqRate out;
  out.K_d = K_d;
  const double kr2 = K_d * R * R;
  if (K_d > 0.0) {
    const RateBound global = lemma_rate_bound(0.0, 0.0, 2.0 * K_d, 1.0);
    out.case_tag = "convex";
    out.inverse_bound = global.inverse;
  } else if (K_d == 0.0) {
    out.case_tag = "flat";
    out.inverse_bound = R * R / 2.0;
  } else if (kr2 >= -4.0) {
    out.case_tag = "mild";
    out.inverse_bound = (std::numbers::e - 1.0) * R * R / 2.0;
  } else {
    out.case_tag = "deep";
    out.inverse_bound = 4.0 * std::sqrt(std::numbers::pi) / R * std::pow(-K_d, -1.5) *
                        std::exp(-kr2 / 4.0);
  }
  out.rate_bound = 1.0 / out.inverse_bound;
  return out;
}

HeatEqRate heat_eq_rate(std::size_t d, double L, double R) {
  return heat_eq_rate_from_K(heat_eq_K(d, L), R);
}

double lipschitz_seminorm_1d(const std::function<double(double)>& g, const DistanceFunction& df,
                             std::span<const double> x_grid) {
  std::vector<double> values(x_grid.size());
  for (std::size_t i = 0; i < x_grid.size(); ++i) values[i] = g(x_grid[i]);
  double best = 0.0;
  for (std::size_t i = 0; i < x_grid.size(); ++i) {
    for (std::size_t j = i + 1; j < x_grid.size(); ++j) {
      const double r = std::abs(x_grid[i] - x_grid[j]);
      if (r == 0.0) continue;
      best = std::max(best, std::abs(values[i] - values[j]) / df.f(r));
    }
  }
  return best;
}

double componentwise_penalty(std::span<const double> c, std::span<const CurvatureProfile> kappa,
                             double delta) {
  require_positive(delta, "delta");
  if (c.size() != kappa.size()) {
    throw std::invalid_argument("componentwise_penalty needs one rate per profile");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    double sup = 0.0;
    for (const auto& p : kappa[i].pieces()) {
      const double lo = p.a;
      const double hi = std::min(p.b, delta);
      if (hi <= lo) break;
      sup = std::max(sup, piece_sup_r_kappa_minus(p, lo, hi));
    }
    total += c[i] * delta + 0.5 * sup;
  }
  return total;
}

}  // namespace contraction
