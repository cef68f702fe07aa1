#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "contraction/curvature.hpp"

namespace contraction {

/// Raised when the adaptive mesh doubling does not reach the requested
/// relative tolerance on the rate.
class QuadratureFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct QuadratureOptions {
  std::size_t n_grid = 1024;
  double rel_tol = 1e-8;
  int max_doublings = 20;
};

/// Values tabulated on the radial grid 0 = r_0 < ... < r_N.
struct DistanceTable {
  std::vector<double> r;
  std::vector<double> phi;
  std::vector<double> Phi;
  std::vector<double> g;
  std::vector<double> f;
  std::vector<double> f_prime;

  std::size_t size() const noexcept { return r.size(); }
};

/// R0 = inf{R >= 0 : kappa(r) >= 0 for all r >= R}.
double compute_R0(const CurvatureProfile& profile);

/// R1 = inf{R >= R0 : kappa(r) R (R - R0) >= 8 for all r >= R}.
double compute_R1(const CurvatureProfile& profile, double R0);

/// Inf of kappa over [R, inf). At jumps both one-sided values count.
double suffix_min_kappa(const CurvatureProfile& profile, double R);

/// The concave distance f(r) = int_0^r phi g together with its rate c.
///
/// The table covers [0, r_max] with r_max >= 2 R1. For r >= R1 the
/// derivative f' = phi(R0)/2 is constant, so f is extended exactly by a
/// straight line rather than read from the table.
class DistanceFunction {
 public:
  const CurvatureProfile& profile() const noexcept { return profile_; }
  const DistanceTable& table() const noexcept { return table_; }

  double R0() const noexcept { return R0_; }
  double R1() const noexcept { return R1_; }
  double rate() const noexcept { return rate_; }
  double phi_R0() const noexcept { return phi_R0_; }
  /// Exact slope of f beyond R1.
  double slope_beyond() const noexcept { return 0.5 * phi_R0_; }
  /// int_0^{R1} Phi / phi, so that 1/c = alpha * rate_integral().
  double rate_integral() const noexcept { return integral_; }
  std::size_t grid_size() const noexcept { return table_.size(); }

  double f(double r) const;
  double f_prime(double r) const;

 private:
  friend DistanceFunction build_distance(const CurvatureProfile&, const QuadratureOptions&);

  DistanceFunction(CurvatureProfile profile) : profile_(std::move(profile)) {}

  CurvatureProfile profile_;
  DistanceTable table_;
  double R0_ = 0.0;
  double R1_ = 0.0;
  double rate_ = 0.0;
  double phi_R0_ = 1.0;
  double integral_ = 0.0;
  double f_R1_ = 0.0;
};

DistanceFunction build_distance(const CurvatureProfile& profile,
                                const QuadratureOptions& options = {});
DistanceFunction build_distance(const CurvatureProfile& profile, std::size_t n_grid);

double eval_f(const DistanceFunction& df, double r);
double eval_f_prime(const DistanceFunction& df, double r);

/// Distance cut at f_R(R): g_R vanishes and f_R is constant for r >= R.
class LocalDistanceFunction {
 public:
  double R() const noexcept { return R_; }
  double rate() const noexcept { return rate_; }
  double cap() const noexcept { return cap_; }
  double rate_integral() const noexcept { return integral_; }
  const DistanceTable& table() const noexcept { return table_; }
  const CurvatureProfile& profile() const noexcept { return profile_; }

  double f(double r) const;
  double f_prime(double r) const;

 private:
  friend LocalDistanceFunction build_local_distance(const CurvatureProfile&, double,
                                                    const QuadratureOptions&);

  LocalDistanceFunction(CurvatureProfile profile) : profile_(std::move(profile)) {}

  CurvatureProfile profile_;
  DistanceTable table_;
  double R_ = 0.0;
  double rate_ = 0.0;
  double cap_ = 0.0;
  double integral_ = 0.0;
};

LocalDistanceFunction build_local_distance(const CurvatureProfile& profile, double R,
                                           const QuadratureOptions& options = {});
LocalDistanceFunction build_local_distance(const CurvatureProfile& profile, double R,
                                           std::size_t n_grid);

/// Upper bound c^{-1} log(2 / (eps phi(R0))) on the W^1 mixing time.
double mixing_time_bound(const DistanceFunction& df, double eps);

}  // namespace contraction
