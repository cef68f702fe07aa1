#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "contraction/distance.hpp"

namespace contraction {

enum class LemmaCase { convex, mild_nonconvex, deep_nonconvex };

std::string to_string(LemmaCase c);

/// Certified lower bound on the rate c for the minorant profile
/// kappa >= -L on (0, R], kappa >= K beyond.
struct RateBound {
  double value = 0.0;
  /// The bound on alpha^{-1} c^{-1} that value inverts.
  double inverse = 0.0;
  LemmaCase case_tag = LemmaCase::convex;
  double R = 0.0;
  double L = 0.0;
  double K = 0.0;
  double alpha = 1.0;
};

/// Cases keyed on L R^2 (R0 = R for L > 0); L = 0 or R = 0 uses
/// 2 max(R^2, 2/K).
RateBound lemma_rate_bound(double R, double L, double K, double alpha = 1.0);

/// c0 exp(-R sup|gamma|). Valid when R <= R0 of the unperturbed profile.
double perturbation_bounded(double c0, double R, double sup_gamma);
/// c0 exp(-L R^2 / 4). Same validity condition.
double perturbation_lipschitz(double c0, double R, double L_pert);

struct ProductRate {
  double rate = 0.0;
  /// Constant in the l^1 comparison W_{l1} <= A e^{-ct} W_{l1}.
  double A = 0.0;
  bool certified = false;
};

/// Throws std::domain_error("no contraction certified ...") if eps_i >= c_i.
ProductRate product_rate(std::span<const double> c, std::span<const double> eps,
                         std::span<const double> phi_R0, std::span<const double> w);

/// rate = min(c_i - 2 lambda / phi_i), A = 2 max(1 / phi_i). A negative
/// rate is returned with certified = false.
ProductRate perturbed_product_rate(std::span<const double> c, std::span<const double> phi_R0,
                                   double lambda);

enum class InteractionKind { mean_field, nearest_neighbour, general };

std::string to_string(InteractionKind kind);
InteractionKind parse_interaction_kind(const std::string& text);

class InteractionMatrix {
 public:
  /// a_ij = a / n for all i, j.
  static InteractionMatrix mean_field(std::size_t n, double a);
  /// a_ij = a / 2 if i - j = +-1 mod n, 0 otherwise.
  static InteractionMatrix nearest_neighbour(std::size_t n, double a);
  static InteractionMatrix general(Eigen::MatrixXd entries);

  std::size_t n() const noexcept { return static_cast<std::size_t>(entries_.rows()); }
  const Eigen::MatrixXd& entries() const noexcept { return entries_; }
  double operator()(std::size_t i, std::size_t j) const {
    return entries_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  InteractionKind kind() const noexcept { return kind_; }
  double coupling_alpha() const noexcept { return coupling_alpha_; }

  /// max_i sum_j (|a_ij| + |a_ji|).
  double max_row_column_sum() const;

 private:
  InteractionMatrix(Eigen::MatrixXd entries, InteractionKind kind, double a);

  Eigen::MatrixXd entries_;
  InteractionKind kind_;
  double coupling_alpha_;
};

struct InteractingRate {
  double lambda = 0.0;
  double rate = 0.0;
  double A = 0.0;
  /// rate > 0.
  bool certified = false;
  /// sum_j (|a_ij| + |a_ji|) <= c phi(R0) / M for all i.
  bool condition_holds = false;
};

InteractingRate interacting_rate(double base_c, double phi_R0, double M,
                                 const InteractionMatrix& a);

/// theta = 4 M / phi(R0), so that the rate reads c - theta |a| for the
/// mean-field and nearest-neighbour matrices.
double interaction_theta(double M, double phi_R0);

double stationary_variance_bound(double c, double lip_norm);
double correlation_bound(double t, double s, double c, double lip_g, double lip_h);

struct ErgodicBounds {
  double bias = 0.0;
  double variance = 0.0;
};

ErgodicBounds ergodic_average_bounds(double t, double c, double lip_g, double moment_d_f);

struct HeatEqRate {
  double K_d = 0.0;
  /// Upper bound on 1/c_R (for K_d > 0 the global 1/c bound).
  double inverse_bound = 0.0;
  double rate_bound = 0.0;
  /// "deep", "mild", "flat" or "convex".
  std::string case_tag;
};

double heat_eq_K(std::size_t d, double L);
HeatEqRate heat_eq_rate(std::size_t d, double L, double R);
/// 1/c_R bound in terms of K = K_d directly.
HeatEqRate heat_eq_rate_from_K(double K_d, double R);

/// Grid lower estimate of sup |g(x) - g(y)| / f(|x - y|).
double lipschitz_seminorm_1d(const std::function<double(double)>& g, const DistanceFunction& df,
                             std::span<const double> x_grid);

/// m(delta) = sum_i (c_i delta + sup_{r < delta} r kappa_i(r)^- / 2).
double componentwise_penalty(std::span<const double> c, std::span<const CurvatureProfile> kappa,
                             double delta);

}  // namespace contraction
