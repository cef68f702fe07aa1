#include "contraction/models.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace contraction {

namespace {

std::size_t as_count(const ModelParams& p, const std::string& key, std::size_t min_value) {
  const double v = p.at(key);
  if (!(v >= static_cast<double>(min_value)) || v != std::floor(v) || v > 1e6) {
    throw std::invalid_argument("parameter '" + key + "' must be an integer >= " +
                                std::to_string(min_value));
  }
  return static_cast<std::size_t>(v);
}

double positive(const ModelParams& p, const std::string& key) {
  const double v = p.at(key);
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw std::invalid_argument("parameter '" + key + "' must be > 0");
  }
  return v;
}

ModelParams resolve(const std::string& name, const ModelParams& overrides) {
  ModelParams params = model_defaults(name);
  for (const auto& [key, value] : overrides) {
    if (!params.count(key)) {
      throw std::invalid_argument("unknown parameter '" + key + "' for model '" + name + "'");
    }
    if (!std::isfinite(value)) throw std::invalid_argument("parameter '" + key + "' must be finite");
    params[key] = value;
  }
  return params;
}

BlockDrift linear_drift(double K) {
  return [K](std::span<const double> x, std::span<double> out) {
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = -0.5 * K * x[i];
  };
}

RegisteredModel interacting(const std::string& name, const ModelParams& params, bool mean_field) {
  const std::size_t n = as_count(params, "n", mean_field ? 1 : 2);
  const double K = positive(params, "K");
  const double M = params.at("M");
  if (!(M >= 0.0)) throw std::invalid_argument("parameter 'M' must be >= 0");
  const double a = params.at("a");
  InteractionMatrix matrix =
      mean_field ? InteractionMatrix::mean_field(n, a) : InteractionMatrix::nearest_neighbour(n, a);
  InteractionDrift gamma;
  if (mean_field) {
    gamma = [M, a](std::span<const double> x, std::span<double> out) {
      double mean = 0.0;
      for (double v : x) mean += v;
      mean /= static_cast<double>(x.size());
      for (std::size_t i = 0; i < x.size(); ++i) out[i] -= M * a * (x[i] - mean);
    };
  } else {
    gamma = [M, a](std::span<const double> x, std::span<double> out) {
      const std::size_t m = x.size();
      for (std::size_t i = 0; i < m; ++i) {
        const double left = x[(i + m - 1) % m];
        const double right = x[(i + 1) % m];
        out[i] -= M * 0.5 * a * ((x[i] - left) + (x[i] - right));
      }
    };
  }
  std::vector<ModelBlock> blocks(n, ModelBlock{1, linear_drift(K)});
  const auto d = static_cast<Eigen::Index>(n);
  RegisteredModel out{ModelSpec(name, std::move(blocks), Eigen::MatrixXd::Identity(d, d),
                                NormKind::intrinsic, std::move(gamma)),
                      std::vector<CurvatureProfile>(n, CurvatureProfile::constant(K)),
                      Eigen::VectorXd::Constant(d, params.at("z0")),
                      Eigen::VectorXd::Zero(d),
                      params,
                      std::move(matrix)};
  return out;
}

}  // namespace

DoubleWellPotential::DoubleWellPotential(double L, double R, double ramp_width, double K_out)
    : L_(L), R_(R), w_(ramp_width), K_(K_out) {
  if (!(L >= 0.0) || !(R >= 0.0)) throw std::invalid_argument("double well needs L, R >= 0");
  if (!(ramp_width > 0.0)) throw std::invalid_argument("double well needs ramp_width > 0");
  if (!(K_out > 0.0)) throw std::invalid_argument("double well needs K_out > 0");
}

double DoubleWellPotential::d2U(double x) const noexcept {
  const double s = std::abs(x);
  const double a = 0.5 * R_;
  if (s <= a) return -L_;
  if (s < a + w_) return -L_ + (K_ + L_) * (s - a) / w_;
  return K_;
}

double DoubleWellPotential::dU(double x) const noexcept {
  const double s = std::abs(x);
  const double a = 0.5 * R_;
  double v;
  if (s <= a) {
    v = -L_ * s;
  } else if (s < a + w_) {
    const double u = s - a;
    v = -L_ * s + (K_ + L_) * u * u / (2.0 * w_);
  } else {
    const double edge = -L_ * (a + w_) + 0.5 * (K_ + L_) * w_;
    v = edge + K_ * (s - a - w_);
  }
  return x < 0.0 ? -v : v;
}

double DoubleWellPotential::U(double x) const noexcept {
  const double s = std::abs(x);
  const double a = 0.5 * R_;
  if (s <= a) return -0.5 * L_ * s * s;
  if (s < a + w_) {
    const double u = s - a;
    return -0.5 * L_ * s * s + (K_ + L_) * u * u * u / (6.0 * w_);
  }
  const double b = a + w_;
  const double U_b = -0.5 * L_ * b * b + (K_ + L_) * w_ * w_ / 6.0;
  const double dU_b = -L_ * b + 0.5 * (K_ + L_) * w_;
  const double u = s - b;
  return U_b + dU_b * u + 0.5 * K_ * u * u;
}

double DoubleWellPotential::default_x_max() const noexcept {
  return 4.0 * (0.5 * R_ + std::sqrt(8.0 / K_));
}

CurvatureProfile double_well_profile(const DoubleWellPotential& potential, std::size_t n_r,
                                     std::size_t n_x) {
  const double x_max = potential.default_x_max();
  std::vector<double> r_grid(n_r);
  for (std::size_t k = 0; k < n_r; ++k) {
    r_grid[k] = x_max * static_cast<double>(k + 1) / static_cast<double>(n_r);
  }
  return profile_from_potential_1d([&](double x) { return potential.dU(x); }, -x_max, x_max, n_x,
                                   r_grid);
}

std::vector<std::string> model_names() {
  return {"ou", "double-well", "product-ou", "mean-field", "nearest-neighbour", "heat-eq"};
}

ModelParams model_defaults(const std::string& name) {
  if (name == "ou") return {{"K", 1.0}, {"dim", 1.0}, {"z0", 1.0}};
  if (name == "double-well") {
    return {{"L", 1.0}, {"R", 4.0}, {"ramp", 0.5}, {"K_out", 1.0},
            {"x0", 2.0}, {"y0", -2.0}, {"n_r", 400.0}};
  }
  if (name == "product-ou") {
    return {{"blocks", 2.0}, {"K1", 1.0}, {"K2", 2.0}, {"K3", 1.0}, {"K4", 1.0}, {"z0", 1.0}};
  }
  if (name == "mean-field" || name == "nearest-neighbour") {
    return {{"n", 5.0}, {"K", 1.0}, {"M", 1.0}, {"a", 0.00625}, {"z0", 1.0}};
  }
  if (name == "heat-eq") return {{"d", 16.0}, {"L", 12.0}, {"z0", 1.0}};
  throw std::invalid_argument("unknown model '" + name + "'");
}

RegisteredModel make_model(const std::string& name, const ModelParams& overrides) {
  const ModelParams params = resolve(name, overrides);

  if (name == "ou") {
    const double K = positive(params, "K");
    const std::size_t dim = as_count(params, "dim", 1);
    const auto d = static_cast<Eigen::Index>(dim);
    Eigen::VectorXd x0 = Eigen::VectorXd::Zero(d);
    x0[0] = params.at("z0");
    return {ModelSpec(name, {ModelBlock{dim, linear_drift(K)}}, Eigen::MatrixXd::Identity(d, d)),
            {CurvatureProfile::constant(K, MetricSpec::identity(dim))},
            x0,
            Eigen::VectorXd::Zero(d),
            params,
            std::nullopt};
  }

  if (name == "double-well") {
    const DoubleWellPotential potential(params.at("L"), params.at("R"), positive(params, "ramp"),
                                        positive(params, "K_out"));
    CurvatureProfile profile = double_well_profile(potential, as_count(params, "n_r", 8));
    BlockDrift drift = [potential](std::span<const double> x, std::span<double> out) {
      out[0] = -0.5 * potential.dU(x[0]);
    };
    Eigen::VectorXd x0(1), y0(1);
    x0[0] = params.at("x0");
    y0[0] = params.at("y0");
    return {ModelSpec(name, {ModelBlock{1, std::move(drift)}}, Eigen::MatrixXd::Identity(1, 1)),
            {std::move(profile)},
            x0,
            y0,
            params,
            std::nullopt};
  }

  if (name == "product-ou") {
    const std::size_t n = as_count(params, "blocks", 1);
    if (n > 4) throw std::invalid_argument("product-ou supports at most 4 blocks");
    std::vector<ModelBlock> blocks;
    std::vector<CurvatureProfile> profiles;
    for (std::size_t i = 0; i < n; ++i) {
      const double K = positive(params, "K" + std::to_string(i + 1));
      blocks.push_back({1, linear_drift(K)});
      profiles.push_back(CurvatureProfile::constant(K));
    }
    const auto d = static_cast<Eigen::Index>(n);
    return {ModelSpec(name, std::move(blocks), Eigen::MatrixXd::Identity(d, d)),
            std::move(profiles),
            Eigen::VectorXd::Constant(d, params.at("z0")),
            Eigen::VectorXd::Zero(d),
            params,
            std::nullopt};
  }

  if (name == "mean-field") return interacting(name, params, true);
  if (name == "nearest-neighbour") return interacting(name, params, false);

  if (name == "heat-eq") {
    const std::size_t d = as_count(params, "d", 2);
    const double L = params.at("L");
    const double d2 = static_cast<double>(d) * static_cast<double>(d);
    BlockDrift drift = [d2, L](std::span<const double> x, std::span<double> out) {
      const std::size_t m = x.size();
      for (std::size_t i = 0; i < m; ++i) {
        const double left = i == 0 ? 0.0 : x[i - 1];
        const double right = i + 1 == m ? 0.0 : x[i + 1];
        out[i] = d2 * (right - 2.0 * x[i] + left) + L * x[i];
      }
    };
    const auto m = static_cast<Eigen::Index>(d - 1);
    const Eigen::MatrixXd sigma = std::sqrt(static_cast<double>(d)) * Eigen::MatrixXd::Identity(m, m);
    const double K_d = heat_eq_K(d, L);
    return {ModelSpec(name, {ModelBlock{d - 1, std::move(drift)}}, sigma),
            {CurvatureProfile::constant(2.0 * K_d, MetricSpec::intrinsic(sigma))},
            Eigen::VectorXd::Constant(m, params.at("z0")),
            Eigen::VectorXd::Zero(m),
            params,
            std::nullopt};
  }
  throw std::invalid_argument("unknown model '" + name + "'");
}

}  // namespace contraction
