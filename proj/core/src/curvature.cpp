#include "contraction/curvature.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace contraction {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double check_sigma(const Eigen::MatrixXd& sigma) {
  if (sigma.rows() == 0 || sigma.rows() != sigma.cols()) {
    throw std::invalid_argument("sigma must be a non-empty square matrix");
  }
  const double det = sigma.determinant();
  if (!(det > 0.0)) {
    throw std::invalid_argument("sigma must have strictly positive determinant");
  }
  return det;
}

// int_a^b s * l(s) ds for l linear with l(a) = u, l(b) = v.
double integral_s_times_linear(double a, double b, double u, double v) {
  return (b - a) / 6.0 * (a * (2.0 * u + v) + b * (u + 2.0 * v));
}

}  // namespace

std::string to_string(NormKind kind) {
  return kind == NormKind::intrinsic ? "intrinsic" : "euclidean";
}

NormKind parse_norm_kind(const std::string& text) {
  if (text == "intrinsic") return NormKind::intrinsic;
  if (text == "euclidean") return NormKind::euclidean;
  throw std::invalid_argument("unknown norm kind '" + text + "'");
}

MetricSpec::MetricSpec() : kind_(NormKind::intrinsic), sigma_(Eigen::MatrixXd::Identity(1, 1)), alpha_(1.0) {}

MetricSpec::MetricSpec(NormKind kind, Eigen::MatrixXd sigma, double alpha)
    : kind_(kind), sigma_(std::move(sigma)), alpha_(alpha) {}

MetricSpec MetricSpec::intrinsic(Eigen::MatrixXd sigma) {
  check_sigma(sigma);
  return MetricSpec(NormKind::intrinsic, std::move(sigma), 1.0);
}

MetricSpec MetricSpec::euclidean(Eigen::MatrixXd sigma) {
  check_sigma(sigma);
  // Largest eigenvalue of (sigma sigma^T)^{-1} = 1 / smallest eigenvalue of
  // sigma sigma^T.
  const Eigen::MatrixXd a = sigma * sigma.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a, Eigen::EigenvaluesOnly);
  const double lambda_min = solver.eigenvalues().minCoeff();
  return MetricSpec(NormKind::euclidean, std::move(sigma), 1.0 / lambda_min);
}

MetricSpec MetricSpec::identity(std::size_t dim) {
  return intrinsic(Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(dim),
                                             static_cast<Eigen::Index>(dim)));
}

MetricSpec MetricSpec::from_alpha(NormKind kind, double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw std::invalid_argument("alpha must be positive and finite");
  }
  if (kind == NormKind::intrinsic && alpha != 1.0) {
    throw std::invalid_argument("intrinsic metric requires alpha = 1");
  }
  Eigen::MatrixXd sigma(1, 1);
  sigma(0, 0) = 1.0 / std::sqrt(alpha);
  return MetricSpec(kind, std::move(sigma), alpha);
}

CurvatureProfile::CurvatureProfile(std::vector<Knot> knots, double tail_value,
                                   MetricSpec metric)
    : knots_(std::move(knots)), tail_(tail_value), metric_(std::move(metric)) {
  if (knots_.empty()) {
    throw InvalidProfile("curvature profile needs at least one knot");
  }
  if (!std::isfinite(tail_)) {
    throw InvalidProfile("tail value must be finite");
  }
  for (std::size_t j = 0; j < knots_.size(); ++j) {
    const auto& k = knots_[j];
    if (!(k.r > 0.0) || !std::isfinite(k.r) || !std::isfinite(k.kappa)) {
      throw InvalidProfile("knots need finite radius > 0 and finite kappa");
    }
    if (j > 0 && k.r < knots_[j - 1].r) {
      throw InvalidProfile("knot radii must be nondecreasing");
    }
    if (j > 1 && k.r == knots_[j - 1].r && k.r == knots_[j - 2].r) {
      throw InvalidProfile("at most two knots may share a radius");
    }
  }

  pieces_.reserve(knots_.size() + 1);
  pieces_.push_back({0.0, knots_.front().r, knots_.front().kappa, knots_.front().kappa});
  for (std::size_t j = 0; j + 1 < knots_.size(); ++j) {
    if (knots_[j + 1].r > knots_[j].r) {
      pieces_.push_back({knots_[j].r, knots_[j + 1].r, knots_[j].kappa, knots_[j + 1].kappa});
    }
  }
  pieces_.push_back({knots_.back().r, kInf, tail_, tail_});
}

CurvatureProfile CurvatureProfile::constant(double value, MetricSpec metric) {
  return CurvatureProfile({{1.0, value}}, value, std::move(metric));
}

double CurvatureProfile::operator()(double r) const {
  if (!(r > 0.0)) {
    throw std::domain_error("kappa(r) requires r > 0");
  }
  if (r > knots_.back().r) return tail_;
  if (r <= knots_.front().r) return knots_.front().kappa;
  // First knot with radius >= r; at a jump this is the earlier knot.
  const auto it = std::lower_bound(knots_.begin(), knots_.end(), r,
                                   [](const Knot& k, double x) { return k.r < x; });
  const auto& right = *it;
  if (right.r == r) return right.kappa;
  const auto& left = *(it - 1);
  return left.kappa + (right.kappa - left.kappa) * (r - left.r) / (right.r - left.r);
}

double CurvatureProfile::integral_r_kappa_minus(double a, double b) const {
  if (b <= a) return 0.0;
  double total = 0.0;
  for (const auto& p : pieces_) {
    const double lo = std::max(a, p.a);
    const double hi = std::min(b, p.b);
    if (hi <= lo) continue;
    const double ulo = -p.value(lo);
    const double uhi = -p.value(hi);
    if (ulo >= 0.0 && uhi >= 0.0) {
      total += integral_s_times_linear(lo, hi, ulo, uhi);
    } else if (ulo > 0.0 || uhi > 0.0) {
      // Sign change inside [lo, hi]; integrate the negative part only.
      const double cross = lo + (hi - lo) * ulo / (ulo - uhi);
      if (ulo > 0.0) {
        total += integral_s_times_linear(lo, cross, ulo, 0.0);
      } else {
        total += integral_s_times_linear(cross, hi, 0.0, uhi);
      }
    }
  }
  return total;
}

CurvatureProfile CurvatureProfile::with_metric(MetricSpec metric) const {
  return CurvatureProfile(knots_, tail_, std::move(metric));
}

bool operator==(const CurvatureProfile& lhs, const CurvatureProfile& rhs) {
  if (lhs.tail_ != rhs.tail_ || lhs.knots_.size() != rhs.knots_.size()) return false;
  if (lhs.metric_.norm_kind() != rhs.metric_.norm_kind() ||
      lhs.metric_.alpha() != rhs.metric_.alpha()) {
    return false;
  }
  for (std::size_t j = 0; j < lhs.knots_.size(); ++j) {
    if (lhs.knots_[j].r != rhs.knots_[j].r || lhs.knots_[j].kappa != rhs.knots_[j].kappa) {
      return false;
    }
  }
  return true;
}

double eval_kappa(const CurvatureProfile& profile, double r) { return profile(r); }

CurvatureProfile profile_from_bounds(double R, double L, double K, MetricSpec metric) {
  if (!(K > 0.0)) {
    throw InvalidProfile("minorant needs K > 0 (tail positivity)");
  }
  if (!(R >= 0.0) || !(L >= 0.0)) {
    throw std::invalid_argument("minorant needs R >= 0 and L >= 0");
  }
  if (R == 0.0) {
    return CurvatureProfile::constant(K, std::move(metric));
  }
  return CurvatureProfile({{R, -L}, {R, K}}, K, std::move(metric));
}

CurvatureProfile profile_from_potential_1d(const std::function<double(double)>& grad_U,
                                           double x_lo, double x_hi, std::size_t n_x,
                                           std::span<const double> r_grid) {
  if (n_x < 2) throw std::invalid_argument("profile_from_potential_1d needs n_x >= 2");
  if (r_grid.empty()) throw std::invalid_argument("r_grid must not be empty");
  std::vector<Knot> knots;
  knots.reserve(r_grid.size());
  double previous = 0.0;
  for (double r : r_grid) {
    if (!(r > previous)) {
      throw std::invalid_argument("r_grid must be positive and strictly increasing");
    }
    previous = r;
    const double span = x_hi - r - x_lo;
    if (span < 0.0) {
      throw std::invalid_argument("x range shorter than radius " + std::to_string(r));
    }
    double best = kInf;
    for (std::size_t i = 0; i < n_x; ++i) {
      const double x = x_lo + span * static_cast<double>(i) / static_cast<double>(n_x - 1);
      const double q = (grad_U(x + r) - grad_U(x)) / r;
      if (!std::isfinite(q)) {
        throw std::domain_error("grad_U is not finite near x = " + std::to_string(x));
      }
      best = std::min(best, q);
    }
    knots.push_back({r, best});
  }
  const double tail = knots.back().kappa;
  if (!(tail > 0.0)) {
    throw InvalidProfile("no strict convexity detected at r_max; enlarge r_grid");
  }
  return CurvatureProfile(std::move(knots), tail);
}

ProfileDiagnostics validate_profile(const CurvatureProfile& profile) {
  ProfileDiagnostics d;
  const auto knots = profile.knots();
  for (std::size_t j = 1; j < knots.size(); ++j) {
    if (knots[j].r < knots[j - 1].r) d.knots_ordered = false;
  }
  if (!d.knots_ordered) d.violations.emplace_back("knot radii are not ordered");
  if (!(profile.tail_value() > 0.0)) {
    d.tail_positive = false;
    d.violations.emplace_back("liminf kappa(r) > 0 violated: tail value is nonpositive");
  }
  d.integral_r_kappa_minus_01 = profile.integral_r_kappa_minus(0.0, 1.0);
  if (!std::isfinite(d.integral_r_kappa_minus_01)) {
    d.finite = false;
    d.violations.emplace_back("int_0^1 r kappa(r)^- dr is not finite");
  }
  d.valid = d.violations.empty();
  return d;
}

void require_valid(const CurvatureProfile& profile) {
  const auto d = validate_profile(profile);
  if (!d.valid) throw InvalidProfile(d.violations.front());
}

}  // namespace contraction
