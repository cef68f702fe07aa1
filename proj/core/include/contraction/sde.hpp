#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "contraction/curvature.hpp"
#include "contraction/rng.hpp"

namespace contraction {

/// Writes b0(x_block) into out (both of the block dimension).
using BlockDrift = std::function<void(std::span<const double> x, std::span<double> out)>;
/// Adds the interaction drift gamma(x) of every block into out (full dimension).
using InteractionDrift = std::function<void(std::span<const double> x, std::span<double> out)>;

struct ModelBlock {
  std::size_t dim = 1;
  BlockDrift drift;
};

/// Drift b^i(x) = b0^i(x^i) + gamma^i(x) with constant sigma. A full
/// sigma is allowed for a single block; with several blocks sigma must be
/// a positive multiple of the identity on each block.
class ModelSpec {
 public:
  ModelSpec(std::string name, std::vector<ModelBlock> blocks, Eigen::MatrixXd sigma,
            NormKind norm = NormKind::intrinsic, InteractionDrift interaction = {});

  const std::string& name() const noexcept { return name_; }
  std::size_t dim() const noexcept { return dim_; }
  std::size_t block_count() const noexcept { return blocks_.size(); }
  std::size_t block_dim(std::size_t i) const { return blocks_.at(i).dim; }
  std::size_t block_offset(std::size_t i) const { return offsets_.at(i); }
  const Eigen::MatrixXd& sigma() const noexcept { return sigma_; }
  const Eigen::MatrixXd& sigma_inverse() const noexcept { return sigma_inv_; }
  /// Scalar sigma on block i (multi-block models only; 0 otherwise).
  double block_scale(std::size_t i) const { return scales_.at(i); }
  NormKind norm() const noexcept { return norm_; }
  bool has_interaction() const noexcept { return static_cast<bool>(interaction_); }
  MetricSpec metric() const;

  void drift(std::span<const double> x, std::span<double> out) const;

  /// Norm of the block difference z^i in the model's norm.
  double block_norm(std::size_t i, std::span<const double> z) const;

 private:
  std::string name_;
  std::vector<ModelBlock> blocks_;
  std::vector<std::size_t> offsets_;
  std::vector<double> scales_;
  std::size_t dim_ = 0;
  Eigen::MatrixXd sigma_;
  Eigen::MatrixXd sigma_inv_;
  NormKind norm_;
  InteractionDrift interaction_;
};

enum class CouplingKind { synchronous, reflection, componentwise };

std::string to_string(CouplingKind kind);
CouplingKind parse_coupling_kind(const std::string& text);

struct CouplingConfig {
  CouplingKind kind = CouplingKind::reflection;
  double delta = 1e-3;
  double eps_merge = 1e-6;
  double h = 1e-3;
  double T = 10.0;
  std::vector<double> save_times;
  std::size_t n_paths = 10000;
  std::uint64_t seed = 1;
  Eigen::VectorXd x0;
  Eigen::VectorXd y0;
  /// Componentwise kind: a reflected block whose difference changes sign
  /// within a step is placed on the band edge |z| = delta/2.
  bool capture_at_band = true;
  /// Worker threads for ensembles; 0 picks the hardware concurrency.
  std::size_t threads = 0;

  /// Throws std::invalid_argument naming the violated constraint.
  void validate(const ModelSpec& model) const;
  /// Number of Euler steps to reach T.
  std::size_t step_count() const;
};

/// Save times 0, dt, 2 dt, ... up to T.
std::vector<double> uniform_save_times(double T, double dt);

struct PairState {
  Eigen::VectorXd x;
  Eigen::VectorXd y;
  std::vector<std::uint8_t> merged_blocks;
  double t = 0.0;

  bool all_merged() const noexcept;
};

PairState initial_state(const ModelSpec& model, const CouplingConfig& config);

/// Raised when a drift evaluation is not finite; the message carries the state.
class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Ramp {
  double lambda;
  double pi;
};

/// lambda = 0 for s <= delta/2, 1 for s >= delta, linear between;
/// pi = sqrt(1 - lambda^2).
Ramp ramp_lambda(double delta, double s);

/// Euler-Maruyama stepper for a coupled pair with preallocated workspace.
class PairStepper {
 public:
  PairStepper(const ModelSpec& model, const CouplingConfig& config);

  /// Gaussian increments per step: d, or 2d for the componentwise kind
  /// (B first, then B-tilde). Each entry is standard normal; scaling by
  /// sqrt(h) happens inside step().
  std::size_t noise_dim() const noexcept { return noise_dim_; }

  void step(PairState& state, std::span<const double> noise);

 private:
  void drift_checked(const Eigen::VectorXd& x, Eigen::VectorXd& out, const PairState& state) const;
  void step_synchronous(PairState& state, std::span<const double> noise);
  void step_reflection(PairState& state, std::span<const double> noise);
  void step_componentwise(PairState& state, std::span<const double> noise);

  const ModelSpec& model_;
  CouplingConfig config_;
  std::size_t noise_dim_;
  double sqrt_h_;
  Eigen::VectorXd bx_, by_, db_, dbt_, e_, u_, wx_, wy_;
  std::vector<double> radius_;
  std::vector<std::uint8_t> reflected_;
};

/// One step with fresh workspace; prefer PairStepper in loops.
PairState step_pair(const ModelSpec& model, const CouplingConfig& config, PairState state,
                    std::span<const double> noise);

/// Per-block distance f_i and weight w_i for d_{f,w}(x, y) = sum f_i(r_i) w_i.
struct BlockDistance {
  std::function<double(double)> f;
  double weight = 1.0;
};

std::vector<BlockDistance> identity_distances(std::size_t blocks);

struct PathRecord {
  /// d_{f,w}(X_t, Y_t) at each save time.
  std::vector<double> distance;
  /// Raw radii r_t^i, save-time major.
  std::vector<double> radii;
  /// First save time index at which every block was merged, or save count.
  std::size_t merged_at = 0;
};

double pair_distance(const ModelSpec& model, const PairState& state,
                     std::span<const BlockDistance> metric, std::span<double> radii_out);

/// Path of the coupled pair driven by rng; deterministic in
/// (rng.seed(), rng.stream()).
PathRecord simulate_pair(const ModelSpec& model, const CouplingConfig& config,
                         std::span<const BlockDistance> metric, CounterRng rng);

}  // namespace contraction
