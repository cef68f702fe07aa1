#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "contraction/sde.hpp"

namespace contraction {

/// Monte Carlo estimates of E[d_{f,w}(X_t, Y_t)] at the save times.
struct DecaySeries {
  std::vector<double> times;
  std::vector<double> mean;
  std::vector<double> std_error;
  /// Fraction of paths coupled by each save time.
  std::vector<double> merged_fraction;
  std::size_t n_paths = 0;
  /// Means over contiguous path batches, batch-major (batches x times).
  std::size_t batches = 0;
  std::vector<double> batch_mean;
  std::vector<std::size_t> batch_size;
  std::string note;
  /// Free-form run description, one key=value per line.
  std::string config_echo;
};

/// Path-parallel ensemble; batches > 0 also records batch means for the
/// jackknife error of fitted rates.
DecaySeries estimate_mean_distance(const ModelSpec& model, const CouplingConfig& config,
                                   std::span<const BlockDistance> metric, std::size_t batches = 20);

/// Deterministic pairwise (tree) summation.
double pairwise_sum(std::span<const double> values);

/// Runs fn(i) for i in [0, n) on up to threads workers and rethrows the
/// first exception. Results must be written by index.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn);
std::size_t resolve_threads(std::size_t requested);

class FitFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RateFit {
  double rate = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  /// Standard error of the fitted rate from the regression residuals.
  double sigma_rate = 0.0;
  /// Delete-one-batch jackknife standard error (NaN without batches).
  double sigma_jackknife = std::numeric_limits<double>::quiet_NaN();
  std::size_t first = 0;
  std::size_t last = 0;
  std::vector<std::size_t> used;
};

enum class FitWeighting { uniform, inverse_variance };

/// Least squares of log(mean) against t over points with mean > 5 stderr.
/// inverse_variance weights each point by (mean / stderr)^2.
RateFit fit_decay_rate(const DecaySeries& series,
                       FitWeighting weighting = FitWeighting::inverse_variance);

struct ContractionReport {
  bool passed = true;
  /// Largest lhs - rhs over pairs j < k (negative or zero when passing).
  double worst_violation = 0.0;
  std::size_t worst_j = 0;
  std::size_t worst_k = 0;
};

enum class SlackRule {
  /// 2 (se_k + se_j).
  literal,
  /// 2 (e^{c t_k} se_k + e^{c t_j} se_j), the standard errors of the
  /// compared quantities.
  scaled,
};

/// Checks e^{c t_k} m_k <= e^{c t_j} m_j + slack for all j < k.
ContractionReport check_contraction(const DecaySeries& series, double c,
                                    SlackRule rule = SlackRule::scaled);

struct ErgodicConfig {
  double t = 100.0;
  std::size_t n_paths = 1000;
  double h = 1e-2;
  std::uint64_t seed = 1;
  /// Certified rate; sets the default burn-in 10/c.
  double c = 1.0;
  /// Burn-in for the stationary reference; <= 0 uses 10/c.
  double burn_in = 0.0;
  std::size_t threads = 0;
};

struct ErgodicStats {
  /// Mean over paths of the time average started at x0.
  double average_from_x0 = 0.0;
  /// Stationary reference: mean over paths of the average after burn-in.
  double stationary_average = 0.0;
  double bias_estimate = 0.0;
  /// Sample variance of the time average after burn-in.
  double variance_estimate = 0.0;
  double burn_in = 0.0;
  bool burn_in_warning = false;
};

ErgodicStats ergodic_average_stats(const ModelSpec& model, const std::function<double(std::span<const double>)>& g,
                                   const Eigen::VectorXd& x0, const ErgodicConfig& config);

}  // namespace contraction
