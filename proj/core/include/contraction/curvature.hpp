#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace contraction {

enum class NormKind { intrinsic, euclidean };

std::string to_string(NormKind kind);
NormKind parse_norm_kind(const std::string& text);

/// Constant diffusion coefficient together with the norm used to measure
/// distances and the distortion constant
///   alpha = sup{ |sigma^{-1} z|^2 : ||z|| = 1 }.
class MetricSpec {
 public:
  /// 1x1 identity coefficient, intrinsic norm, alpha = 1.
  MetricSpec();

  static MetricSpec intrinsic(Eigen::MatrixXd sigma);
  static MetricSpec euclidean(Eigen::MatrixXd sigma);
  static MetricSpec identity(std::size_t dim = 1);

  /// Metric reconstructed from its serialized (norm, alpha) pair. The
  /// coefficient is the scalar alpha^{-1/2}, which reproduces alpha.
  static MetricSpec from_alpha(NormKind kind, double alpha);

  NormKind norm_kind() const noexcept { return kind_; }
  const Eigen::MatrixXd& sigma() const noexcept { return sigma_; }
  double alpha() const noexcept { return alpha_; }

 private:
  MetricSpec(NormKind kind, Eigen::MatrixXd sigma, double alpha);

  NormKind kind_;
  Eigen::MatrixXd sigma_;
  double alpha_;
};

struct Knot {
  double r;
  double kappa;
};

/// One linear piece of a curvature profile on [a, b]. The first piece
/// covers (0, r_1] with the constant value kappa(r_1); the last covers
/// [r_N, inf) with the tail value.
struct ProfilePiece {
  double a;
  double b;
  double ka;
  double kb;

  double value(double r) const noexcept {
    if (b == std::numeric_limits<double>::infinity() || b == a) return ka;
    return ka + (kb - ka) * (r - a) / (b - a);
  }
};

/// The curvature function r -> kappa(r): piecewise linear between knots,
/// constant kappa(r_1) below the first knot, constant tail beyond the last.
///
/// Two consecutive knots may share a radius; this encodes a jump (a
/// zero-width ramp). At a jump radius the profile evaluates to the value
/// of the first of the two knots, i.e. the left limit. Tail positivity is
/// not enforced here (local distances do not need it); use
/// validate_profile() to check the global assumptions.
class CurvatureProfile {
 public:
  CurvatureProfile(std::vector<Knot> knots, double tail_value,
                   MetricSpec metric = MetricSpec());

  /// Constant profile kappa == value.
  static CurvatureProfile constant(double value,
                                   MetricSpec metric = MetricSpec());

  double operator()(double r) const;

  std::span<const Knot> knots() const noexcept { return knots_; }
  double tail_value() const noexcept { return tail_; }
  const MetricSpec& metric() const noexcept { return metric_; }
  double last_knot_radius() const noexcept { return knots_.back().r; }

  /// Pieces covering (0, inf) in increasing order. Jumps appear as a
  /// discontinuity between consecutive pieces.
  const std::vector<ProfilePiece>& pieces() const noexcept { return pieces_; }

  /// Exact value of int_a^b r kappa(r)^- dr.
  double integral_r_kappa_minus(double a, double b) const;

  /// Same profile with a different metric.
  CurvatureProfile with_metric(MetricSpec metric) const;

  friend bool operator==(const CurvatureProfile& lhs,
                         const CurvatureProfile& rhs);

 private:
  std::vector<Knot> knots_;
  double tail_;
  MetricSpec metric_;
  std::vector<ProfilePiece> pieces_;
};

double eval_kappa(const CurvatureProfile& profile, double r);

/// Minorant of a profile satisfying kappa >= -L on (0, R] and kappa >= K
/// on (R, inf).
CurvatureProfile profile_from_bounds(double R, double L, double K,
                                     MetricSpec metric = MetricSpec());

/// kappa(r) = min over n_x equispaced x in [x_lo, x_hi - r] of
/// (U'(x + r) - U'(x)) / r, for each radius in r_grid.
CurvatureProfile profile_from_potential_1d(
    const std::function<double(double)>& grad_U, double x_lo, double x_hi,
    std::size_t n_x, std::span<const double> r_grid);

struct ProfileDiagnostics {
  bool valid = true;
  bool tail_positive = true;
  bool knots_ordered = true;
  bool finite = true;
  double integral_r_kappa_minus_01 = 0.0;
  std::vector<std::string> violations;
};

ProfileDiagnostics validate_profile(const CurvatureProfile& profile);

/// Throws InvalidProfile naming the first violated assumption.
void require_valid(const CurvatureProfile& profile);

class InvalidProfile : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// CSV: header "r,kappa", one row per knot, and a trailing metadata line
// "tail=<value>,alpha=<value>,norm=<kind>".
void write_profile_csv(std::ostream& out, const CurvatureProfile& profile);
CurvatureProfile read_profile_csv(std::istream& in);
void save_profile_csv(const std::string& path, const CurvatureProfile& profile);
CurvatureProfile load_profile_csv(const std::string& path);

}  // namespace contraction
