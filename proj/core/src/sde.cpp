#include "contraction/sde.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace contraction {

namespace {

std::string dump(const char* what, const PairState& s) {
  std::ostringstream out;
  out.precision(17);
  out << what << " at t=" << s.t << "; x=[" << s.x.transpose() << "] y=[" << s.y.transpose() << "]";
  return out.str();
}

}  // namespace

ModelSpec::ModelSpec(std::string name, std::vector<ModelBlock> blocks, Eigen::MatrixXd sigma,
                     NormKind norm, InteractionDrift interaction)
    : name_(std::move(name)),
      blocks_(std::move(blocks)),
      sigma_(std::move(sigma)),
      norm_(norm),
      interaction_(std::move(interaction)) {
  if (blocks_.empty()) throw std::invalid_argument("model needs at least one block");
  for (const auto& b : blocks_) {
    if (b.dim == 0) throw std::invalid_argument("block dimension must be positive");
    if (!b.drift) throw std::invalid_argument("every block needs a drift");
    offsets_.push_back(dim_);
    dim_ += b.dim;
  }
  const auto d = static_cast<Eigen::Index>(dim_);
  if (sigma_.rows() != d || sigma_.cols() != d) {
    throw std::invalid_argument("sigma must be a square matrix of the model dimension");
  }
  if (!(sigma_.determinant() > 0.0)) {
    throw std::invalid_argument("sigma must have strictly positive determinant");
  }
  sigma_inv_ = sigma_.inverse();
  scales_.assign(blocks_.size(), 0.0);
  if (blocks_.size() > 1) {
    for (std::size_t i = 0; i < blocks_.size(); ++i) {
      const auto off = static_cast<Eigen::Index>(offsets_[i]);
      const auto n = static_cast<Eigen::Index>(blocks_[i].dim);
      const double s = sigma_(off, off);
      Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(d, n);
      expected.block(off, 0, n, n) = s * Eigen::MatrixXd::Identity(n, n);
      if (!(s > 0.0) || sigma_.middleCols(off, n) != expected) {
        throw std::invalid_argument(
            "multi-block models need sigma equal to a positive multiple of the identity per block");
      }
      scales_[i] = s;
    }
  }
}

MetricSpec ModelSpec::metric() const {
  return norm_ == NormKind::intrinsic ? MetricSpec::intrinsic(sigma_) : MetricSpec::euclidean(sigma_);
}

void ModelSpec::drift(std::span<const double> x, std::span<double> out) const {
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    blocks_[i].drift(x.subspan(offsets_[i], blocks_[i].dim), out.subspan(offsets_[i], blocks_[i].dim));
  }
  if (interaction_) interaction_(x, out);
}

double ModelSpec::block_norm(std::size_t i, std::span<const double> z) const {
  double sq = 0.0;
  if (blocks_.size() == 1 && norm_ == NormKind::intrinsic) {
    const Eigen::Map<const Eigen::VectorXd> zv(z.data(), static_cast<Eigen::Index>(z.size()));
    return (sigma_inv_ * zv).norm();
  }
  for (double v : z) sq += v * v;
  const double r = std::sqrt(sq);
  if (blocks_.size() > 1 && norm_ == NormKind::intrinsic) return r / scales_[i];
  return r;
}

std::string to_string(CouplingKind kind) {
  switch (kind) {
    case CouplingKind::synchronous: return "synchronous";
    case CouplingKind::reflection: return "reflection";
    case CouplingKind::componentwise: return "componentwise";
  }
  return "unknown";
}

CouplingKind parse_coupling_kind(const std::string& text) {
  if (text == "synchronous") return CouplingKind::synchronous;
  if (text == "reflection") return CouplingKind::reflection;
  if (text == "componentwise") return CouplingKind::componentwise;
  throw std::invalid_argument("unknown coupling kind '" + text + "'");
}

std::size_t CouplingConfig::step_count() const {
  return static_cast<std::size_t>(std::llround(T / h));
}

void CouplingConfig::validate(const ModelSpec& model) const {
  if (!(h > 0.0) || !std::isfinite(h)) throw std::invalid_argument("step size h must be > 0");
  if (!(T > 0.0) || !std::isfinite(T)) throw std::invalid_argument("horizon T must be > 0");
  const double steps = T / h;
  if (std::abs(steps - std::round(steps)) > 1e-6 * std::max(1.0, steps)) {
    throw std::invalid_argument("horizon T must be an integer multiple of h");
  }
  if (!(eps_merge > 0.0)) throw std::invalid_argument("eps_merge must be > 0");
  if (!(delta > 0.0)) throw std::invalid_argument("delta must be > 0");
  if (kind == CouplingKind::componentwise && !(eps_merge < delta / 2.0)) {
    throw std::invalid_argument("componentwise coupling needs eps_merge < delta/2");
  }
  if (n_paths == 0) throw std::invalid_argument("n_paths must be positive");
  if (save_times.empty()) throw std::invalid_argument("save_times must not be empty");
  for (std::size_t k = 0; k < save_times.size(); ++k) {
    const double t = save_times[k];
    if (!(t >= 0.0) || t > T * (1.0 + 1e-12)) {
      throw std::invalid_argument("save times must lie in [0, T]");
    }
    if (k > 0 && !(t > save_times[k - 1])) {
      throw std::invalid_argument("save times must be strictly increasing");
    }
  }
  const auto d = static_cast<Eigen::Index>(model.dim());
  if (x0.size() != d || y0.size() != d) {
    throw std::invalid_argument("initial states must have the model dimension " +
                                std::to_string(model.dim()));
  }
}

std::vector<double> uniform_save_times(double T, double dt) {
  if (!(dt > 0.0) || !(T > 0.0)) throw std::invalid_argument("save grid needs T > 0 and dt > 0");
  std::vector<double> out;
  const auto n = static_cast<std::size_t>(std::floor(T / dt + 1e-9));
  for (std::size_t k = 0; k <= n; ++k) out.push_back(static_cast<double>(k) * dt);
  return out;
}

bool PairState::all_merged() const noexcept {
  return std::all_of(merged_blocks.begin(), merged_blocks.end(), [](std::uint8_t m) { return m != 0; });
}

PairState initial_state(const ModelSpec& model, const CouplingConfig& config) {
  PairState s;
  s.x = config.x0;
  s.y = config.y0;
  s.t = 0.0;
  s.merged_blocks.assign(model.block_count(), 0);
  const bool equal = s.x == s.y;
  for (std::size_t i = 0; i < model.block_count(); ++i) {
    const auto off = static_cast<Eigen::Index>(model.block_offset(i));
    const auto n = static_cast<Eigen::Index>(model.block_dim(i));
    const bool block_equal = s.x.segment(off, n) == s.y.segment(off, n);
    s.merged_blocks[i] = config.kind == CouplingKind::reflection ? equal : block_equal;
  }
  return s;
}

Ramp ramp_lambda(double delta, double s) {
  double lambda;
  if (s <= 0.5 * delta) {
    lambda = 0.0;
  } else if (s >= delta) {
    lambda = 1.0;
  } else {
    lambda = (s - 0.5 * delta) / (0.5 * delta);
  }
  return {lambda, std::sqrt(std::max(0.0, 1.0 - lambda * lambda))};
}

PairStepper::PairStepper(const ModelSpec& model, const CouplingConfig& config)
    : model_(model),
      config_(config),
      noise_dim_(config.kind == CouplingKind::componentwise ? 2 * model.dim() : model.dim()),
      sqrt_h_(std::sqrt(config.h)) {
  const auto d = static_cast<Eigen::Index>(model.dim());
  bx_.resize(d);
  by_.resize(d);
  db_.resize(d);
  dbt_.resize(d);
  e_.resize(d);
  u_.resize(d);
  radius_.assign(model.block_count(), 0.0);
  reflected_.assign(model.block_count(), 0);
  wx_.resize(d);
  wy_.resize(d);
}

void PairStepper::drift_checked(const Eigen::VectorXd& x, Eigen::VectorXd& out,
                                const PairState& state) const {
  out.setZero();
  model_.drift({x.data(), static_cast<std::size_t>(x.size())},
               {out.data(), static_cast<std::size_t>(out.size())});
  if (!out.allFinite()) throw SimulationError(dump("non-finite drift", state));
}

void PairStepper::step(PairState& state, std::span<const double> noise) {
  if (noise.size() != noise_dim_) {
    throw std::invalid_argument("noise vector has the wrong dimension");
  }
  switch (config_.kind) {
    case CouplingKind::synchronous: step_synchronous(state, noise); break;
    case CouplingKind::reflection: step_reflection(state, noise); break;
    case CouplingKind::componentwise: step_componentwise(state, noise); break;
  }
  state.t += config_.h;
}

void PairStepper::step_synchronous(PairState& state, std::span<const double> noise) {
  const double h = config_.h;
  for (Eigen::Index k = 0; k < db_.size(); ++k) db_[k] = sqrt_h_ * noise[static_cast<std::size_t>(k)];
  wx_.noalias() = model_.sigma() * db_;
  drift_checked(state.x, bx_, state);
  if (state.all_merged()) {
    state.x += bx_ * h + wx_;
    state.y = state.x;
    return;
  }
  drift_checked(state.y, by_, state);
  state.x += bx_ * h + wx_;
  state.y += by_ * h + wx_;
  for (std::size_t i = 0; i < model_.block_count(); ++i) {
    const auto off = static_cast<Eigen::Index>(model_.block_offset(i));
    const auto n = static_cast<Eigen::Index>(model_.block_dim(i));
    state.merged_blocks[i] = state.x.segment(off, n) == state.y.segment(off, n);
  }
}

void PairStepper::step_reflection(PairState& state, std::span<const double> noise) {
  const double h = config_.h;
  for (Eigen::Index k = 0; k < db_.size(); ++k) db_[k] = sqrt_h_ * noise[static_cast<std::size_t>(k)];
  drift_checked(state.x, bx_, state);
  wx_.noalias() = model_.sigma() * db_;
  if (state.all_merged()) {
    state.x += bx_ * h + wx_;
    state.y = state.x;
    return;
  }
  drift_checked(state.y, by_, state);
  u_.noalias() = model_.sigma_inverse() * (state.x - state.y);
  const double norm = u_.norm();
  if (norm == 0.0) {
    state.x += bx_ * h + wx_;
    state.y = state.x;
    std::fill(state.merged_blocks.begin(), state.merged_blocks.end(), 1);
    return;
  }
  e_ = u_ / norm;
  dbt_ = db_ - 2.0 * e_.dot(db_) * e_;
  wy_.noalias() = model_.sigma() * dbt_;
  state.x += bx_ * h + wx_;
  state.y += by_ * h + wy_;
  u_.noalias() = model_.sigma_inverse() * (state.x - state.y);
  if (u_.norm() <= config_.eps_merge || e_.dot(u_) <= 0.0) {
    state.y = state.x;
    std::fill(state.merged_blocks.begin(), state.merged_blocks.end(), 1);
  }
}

void PairStepper::step_componentwise(PairState& state, std::span<const double> noise) {
  const double h = config_.h;
  const auto d = db_.size();
  for (Eigen::Index k = 0; k < d; ++k) {
    db_[k] = sqrt_h_ * noise[static_cast<std::size_t>(k)];
    dbt_[k] = sqrt_h_ * noise[static_cast<std::size_t>(d + k)];
  }
  drift_checked(state.x, bx_, state);
  drift_checked(state.y, by_, state);
  const bool single = model_.block_count() == 1;
  e_ = state.x - state.y;
  if (single) {
    u_.noalias() = model_.sigma_inverse() * e_;
  } else {
    u_ = e_;
  }
  for (std::size_t i = 0; i < model_.block_count(); ++i) {
    const auto off = static_cast<Eigen::Index>(model_.block_offset(i));
    const auto n = static_cast<Eigen::Index>(model_.block_dim(i));
    auto ui = u_.segment(off, n);
    double r;
    if (!single) {
      r = model_.norm() == NormKind::intrinsic ? ui.norm() / model_.block_scale(i) : ui.norm();
    } else {
      r = model_.norm() == NormKind::intrinsic ? ui.norm() : e_.norm();
    }
    const Ramp ramp = ramp_lambda(config_.delta, r);
    radius_[i] = r;
    reflected_[i] = ramp.lambda > 0.0;
    auto dbi = db_.segment(off, n);
    auto dti = dbt_.segment(off, n);
    if (ramp.lambda > 0.0) {
      const double proj = 2.0 * ui.dot(dbi) / ui.squaredNorm();
      wx_.segment(off, n) = ramp.lambda * dbi + ramp.pi * dti;
      wy_.segment(off, n) = ramp.lambda * (dbi - proj * ui) + ramp.pi * dti;
    } else {
      wx_.segment(off, n).noalias() = dti;
      wy_.segment(off, n).noalias() = dti;
    }
  }
  if (single) {
    state.x += bx_ * h + model_.sigma() * wx_;
    state.y += by_ * h + model_.sigma() * wy_;
  } else {
    for (std::size_t i = 0; i < model_.block_count(); ++i) {
      const auto off = static_cast<Eigen::Index>(model_.block_offset(i));
      const auto n = static_cast<Eigen::Index>(model_.block_dim(i));
      const double s = model_.block_scale(i);
      state.x.segment(off, n) += bx_.segment(off, n) * h + s * wx_.segment(off, n);
      state.y.segment(off, n) += by_.segment(off, n) * h + s * wy_.segment(off, n);
    }
  }
  if (config_.capture_at_band) {
    // A reflected block whose difference flips sign has crossed the band
    // |z| <= delta/2; restart it on the band edge along the old direction.
    wx_ = state.x - state.y;
    if (single) {
      wy_.noalias() = model_.sigma_inverse() * wx_;
    } else {
      wy_ = wx_;
    }
    for (std::size_t i = 0; i < model_.block_count(); ++i) {
      const auto off = static_cast<Eigen::Index>(model_.block_offset(i));
      const auto n = static_cast<Eigen::Index>(model_.block_dim(i));
      if (!reflected_[i] || u_.segment(off, n).dot(wy_.segment(off, n)) > 0.0) continue;
      const double scale = 0.5 * config_.delta / radius_[i];
      state.y.segment(off, n) = state.x.segment(off, n) - scale * e_.segment(off, n);
    }
  }
  for (std::size_t i = 0; i < model_.block_count(); ++i) {
    const auto off = static_cast<Eigen::Index>(model_.block_offset(i));
    const auto n = static_cast<Eigen::Index>(model_.block_dim(i));
    state.merged_blocks[i] = state.x.segment(off, n) == state.y.segment(off, n);
  }
}

PairState step_pair(const ModelSpec& model, const CouplingConfig& config, PairState state,
                    std::span<const double> noise) {
  PairStepper stepper(model, config);
  stepper.step(state, noise);
  return state;
}

std::vector<BlockDistance> identity_distances(std::size_t blocks) {
  return std::vector<BlockDistance>(blocks, BlockDistance{[](double r) { return r; }, 1.0});
}

double pair_distance(const ModelSpec& model, const PairState& state,
                     std::span<const BlockDistance> metric, std::span<double> radii_out) {
  if (metric.size() != model.block_count()) {
    throw std::invalid_argument("need one block distance per model block");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < model.block_count(); ++i) {
    const auto off = static_cast<Eigen::Index>(model.block_offset(i));
    const auto n = static_cast<Eigen::Index>(model.block_dim(i));
    const Eigen::VectorXd z = state.x.segment(off, n) - state.y.segment(off, n);
    const double r = model.block_norm(i, {z.data(), static_cast<std::size_t>(n)});
    if (!radii_out.empty()) radii_out[i] = r;
    total += r == 0.0 ? 0.0 : metric[i].weight * metric[i].f(r);
  }
  return total;
}

PathRecord simulate_pair(const ModelSpec& model, const CouplingConfig& config,
                         std::span<const BlockDistance> metric, CounterRng rng) {
  config.validate(model);
  if (metric.size() != model.block_count()) {
    throw std::invalid_argument("need one block distance per model block");
  }
  const std::size_t n_save = config.save_times.size();
  const std::size_t blocks = model.block_count();
  PathRecord rec;
  rec.distance.assign(n_save, 0.0);
  rec.radii.assign(n_save * blocks, 0.0);
  rec.merged_at = n_save;

  std::vector<std::size_t> save_step(n_save);
  for (std::size_t k = 0; k < n_save; ++k) {
    save_step[k] = static_cast<std::size_t>(std::llround(config.save_times[k] / config.h));
  }
  PairState state = initial_state(model, config);
  PairStepper stepper(model, config);
  std::vector<double> noise(stepper.noise_dim());
  const bool absorbing = config.kind != CouplingKind::componentwise;
  const std::size_t n_steps = config.step_count();

  std::size_t next = 0;
  auto record = [&](std::size_t step) {
    while (next < n_save && save_step[next] == step) {
      rec.distance[next] = pair_distance(model, state, metric, {rec.radii.data() + next * blocks, blocks});
      if (absorbing && rec.merged_at == n_save && state.all_merged()) rec.merged_at = next;
      ++next;
    }
  };
  record(0);
  for (std::size_t step = 1; step <= n_steps && next < n_save; ++step) {
    if (absorbing && state.all_merged()) break;
    rng.fill_normal(noise);
    stepper.step(state, noise);
    record(step);
  }
  if (absorbing && state.all_merged()) rec.merged_at = std::min(rec.merged_at, next);
  return rec;
}

}  // namespace contraction
