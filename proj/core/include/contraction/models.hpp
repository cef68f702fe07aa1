#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "contraction/bounds.hpp"
#include "contraction/curvature.hpp"
#include "contraction/sde.hpp"

namespace contraction {

/// Symmetric C^2 potential with U'' = -L on [-R/2, R/2], a linear ramp of
/// U'' up to K_out over the next ramp_width, and U'' = K_out beyond.
class DoubleWellPotential {
 public:
  DoubleWellPotential(double L, double R, double ramp_width, double K_out);

  double U(double x) const noexcept;
  double dU(double x) const noexcept;
  double d2U(double x) const noexcept;

  double L() const noexcept { return L_; }
  double R() const noexcept { return R_; }
  double ramp_width() const noexcept { return w_; }
  double K_out() const noexcept { return K_; }
  /// Default truncation 4 (R/2 + sqrt(8 / K_out)).
  double default_x_max() const noexcept;

 private:
  double L_, R_, w_, K_;
};

/// Curvature profile of the Langevin drift -U'/2 estimated on a grid.
CurvatureProfile double_well_profile(const DoubleWellPotential& potential, std::size_t n_r = 400,
                                     std::size_t n_x = 4001);

using ModelParams = std::map<std::string, double>;

/// A registry model with its per-block curvature profiles and the default
/// initial pair.
struct RegisteredModel {
  ModelSpec model;
  std::vector<CurvatureProfile> profiles;
  Eigen::VectorXd x0;
  Eigen::VectorXd y0;
  /// Resolved parameters (defaults filled in).
  ModelParams params;
  /// Interaction matrix for the interacting models.
  std::optional<InteractionMatrix> interaction;
};

std::vector<std::string> model_names();
/// Parameter names with defaults for a registry model.
ModelParams model_defaults(const std::string& name);
/// Throws std::invalid_argument on an unknown model or parameter.
RegisteredModel make_model(const std::string& name, const ModelParams& overrides = {});

}  // namespace contraction
