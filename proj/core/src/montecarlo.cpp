#include "contraction/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

namespace contraction {

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 8) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

std::size_t resolve_threads(std::size_t requested) {
  if (requested > 0) return requested;
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min(resolve_threads(threads), std::max<std::size_t>(n, 1));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(n);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

namespace {

struct MeanAndError {
  double mean;
  double std_error;
};

MeanAndError mean_and_error(std::vector<double>& column) {
  const auto n = static_cast<double>(column.size());
  const double mean = pairwise_sum(column) / n;
  for (double& v : column) v = (v - mean) * (v - mean);
  const double var = column.size() > 1 ? pairwise_sum(column) / (n - 1.0) : 0.0;
  return {mean, std::sqrt(var / n)};
}

std::string describe(const ModelSpec& model, const CouplingConfig& config) {
  std::ostringstream out;
  out.precision(17);
  out << "model=" << model.name() << "\n"
      << "coupling=" << to_string(config.kind) << "\n"
      << "delta=" << config.delta << "\n"
      << "eps_merge=" << config.eps_merge << "\n"
      << "h=" << config.h << "\n"
      << "T=" << config.T << "\n"
      << "paths=" << config.n_paths << "\n"
      << "seed=" << config.seed << "\n";
  return out.str();
}

}  // namespace

DecaySeries estimate_mean_distance(const ModelSpec& model, const CouplingConfig& config,
                                   std::span<const BlockDistance> metric, std::size_t batches) {
  config.validate(model);
  if (config.n_paths < 100) throw std::invalid_argument("ensembles need at least 100 paths");
  const std::size_t n_save = config.save_times.size();
  const std::size_t n_paths = config.n_paths;
  std::vector<double> values(n_save * n_paths);
  std::vector<std::size_t> merged_at(n_paths);

  parallel_for(n_paths, config.threads, [&](std::size_t p) {
    const PathRecord rec = simulate_pair(model, config, metric, CounterRng(config.seed, p));
    for (std::size_t k = 0; k < n_save; ++k) values[k * n_paths + p] = rec.distance[k];
    merged_at[p] = rec.merged_at;
  });

  DecaySeries series;
  series.times = config.save_times;
  series.n_paths = n_paths;
  series.config_echo = describe(model, config);
  series.mean.resize(n_save);
  series.std_error.resize(n_save);
  series.merged_fraction.resize(n_save);
  series.batches = std::min(batches, n_paths);
  series.batch_mean.assign(series.batches * n_save, 0.0);
  for (std::size_t b = 0; b < series.batches; ++b) {
    const std::size_t lo = b * n_paths / series.batches;
    const std::size_t hi = (b + 1) * n_paths / series.batches;
    series.batch_size.push_back(hi - lo);
    for (std::size_t k = 0; k < n_save; ++k) {
      const std::span<const double> part(values.data() + k * n_paths + lo, hi - lo);
      series.batch_mean[b * n_save + k] = pairwise_sum(part) / static_cast<double>(hi - lo);
    }
  }
  std::vector<double> column(n_paths);
  for (std::size_t k = 0; k < n_save; ++k) {
    std::copy_n(values.begin() + static_cast<std::ptrdiff_t>(k * n_paths), n_paths, column.begin());
    const MeanAndError me = mean_and_error(column);
    series.mean[k] = me.mean;
    series.std_error[k] = me.std_error;
    const auto merged = std::count_if(merged_at.begin(), merged_at.end(),
                                      [k](std::size_t m) { return m <= k; });
    series.merged_fraction[k] = static_cast<double>(merged) / static_cast<double>(n_paths);
  }
  const std::size_t first_positive_time = series.times.front() > 0.0 ? 0 : 1;
  if (first_positive_time < n_save) {
    const bool all_zero = std::all_of(series.mean.begin() + static_cast<std::ptrdiff_t>(first_positive_time),
                                      series.mean.end(), [](double m) { return m == 0.0; });
    if (all_zero) series.note = "all paths merged before the first save time";
  }
  return series;
}

namespace {

struct LineFit {
  double slope;
  double intercept;
  double ssr;
  double syy;
  double sxx;
};

LineFit weighted_line(std::span<const double> t, std::span<const double> y, std::span<const double> w) {
  double sw = 0.0, st = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    sw += w[i];
    st += w[i] * t[i];
    sy += w[i] * y[i];
  }
  const double tbar = st / sw;
  const double ybar = sy / sw;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    sxx += w[i] * (t[i] - tbar) * (t[i] - tbar);
    sxy += w[i] * (t[i] - tbar) * (y[i] - ybar);
    syy += w[i] * (y[i] - ybar) * (y[i] - ybar);
  }
  if (!(sxx > 0.0)) throw FitFailure("decay fit needs distinct times");
  const double slope = sxy / sxx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double r = y[i] - (ybar + slope * (t[i] - tbar));
    ssr += w[i] * r * r;
  }
  return {slope, ybar - slope * tbar, ssr, syy, sxx};
}

}  // namespace

RateFit fit_decay_rate(const DecaySeries& series, FitWeighting weighting) {
  RateFit fit;
  for (std::size_t k = 0; k < series.mean.size(); ++k) {
    const double m = series.mean[k];
    if (m > 0.0 && m > 5.0 * series.std_error[k]) fit.used.push_back(k);
  }
  const std::size_t n = fit.used.size();
  if (n < 3) {
    throw FitFailure("decay fit needs at least 3 points with mean > 5 stderr, found " +
                     std::to_string(n));
  }
  std::vector<double> t(n), y(n), w(n, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    t[i] = series.times[fit.used[i]];
    y[i] = std::log(series.mean[fit.used[i]]);
  }
  // Weights 1 / var(log m) ~ (m / se)^2; exact points get the largest
  // weight of the noisy ones.
  if (weighting == FitWeighting::inverse_variance) {
    double min_rel = std::numeric_limits<double>::infinity();
    for (std::size_t k : fit.used) {
      const double rel = series.std_error[k] / series.mean[k];
      if (rel > 0.0) min_rel = std::min(min_rel, rel);
    }
    if (std::isfinite(min_rel)) {
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t k = fit.used[i];
        const double rel = std::max(series.std_error[k] / series.mean[k], min_rel);
        w[i] = 1.0 / (rel * rel);
      }
    }
  }
  const LineFit line = weighted_line(t, y, w);
  fit.rate = -line.slope;
  fit.intercept = line.intercept;
  fit.r_squared = line.syy > 0.0 ? 1.0 - line.ssr / line.syy : 1.0;
  fit.sigma_rate = std::sqrt(line.ssr / static_cast<double>(n - 2) / line.sxx);
  fit.first = fit.used.front();
  fit.last = fit.used.back();

  // Jackknife over path batches with the window and weights held fixed.
  const std::size_t B = series.batches;
  const std::size_t n_save = series.mean.size();
  if (B >= 2 && series.batch_mean.size() == B * n_save && series.batch_size.size() == B) {
    const auto total = static_cast<double>(series.n_paths);
    std::vector<double> rates;
    bool ok = true;
    for (std::size_t b = 0; b < B && ok; ++b) {
      const auto nb = static_cast<double>(series.batch_size[b]);
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t k = fit.used[i];
        const double m = (total * series.mean[k] - nb * series.batch_mean[b * n_save + k]) / (total - nb);
        if (!(m > 0.0)) {
          ok = false;
          break;
        }
        y[i] = std::log(m);
      }
      if (ok) rates.push_back(-weighted_line(t, y, w).slope);
    }
    if (ok) {
      double mean = 0.0;
      for (double r : rates) mean += r;
      mean /= static_cast<double>(B);
      double ss = 0.0;
      for (double r : rates) ss += (r - mean) * (r - mean);
      fit.sigma_jackknife = std::sqrt(static_cast<double>(B - 1) / static_cast<double>(B) * ss);
    }
  }
  return fit;
}

ContractionReport check_contraction(const DecaySeries& series, double c, SlackRule rule) {
  if (!(c > 0.0)) throw std::domain_error("check_contraction needs c > 0");
  ContractionReport report;
  report.worst_violation = -std::numeric_limits<double>::infinity();
  const std::size_t n = series.mean.size();
  std::vector<double> scaled(n), slack(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double growth = std::exp(c * series.times[k]);
    scaled[k] = growth * series.mean[k];
    slack[k] = 2.0 * (rule == SlackRule::scaled ? growth : 1.0) * series.std_error[k];
  }
  for (std::size_t k = 1; k < n; ++k) {
    for (std::size_t j = 0; j < k; ++j) {
      const double excess = scaled[k] - scaled[j] - slack[k] - slack[j];
      if (excess > report.worst_violation) {
        report.worst_violation = excess;
        report.worst_j = j;
        report.worst_k = k;
      }
    }
  }
  if (n < 2) report.worst_violation = 0.0;
  report.passed = report.worst_violation <= 0.0;
  return report;
}

ErgodicStats ergodic_average_stats(const ModelSpec& model,
                                   const std::function<double(std::span<const double>)>& g,
                                   const Eigen::VectorXd& x0, const ErgodicConfig& config) {
  if (!(config.t > 0.0)) throw std::domain_error("ergodic averages need t > 0");
  if (!(config.c > 0.0)) throw std::domain_error("ergodic averages need c > 0");
  if (!(config.h > 0.0)) throw std::invalid_argument("step size h must be > 0");
  if (config.n_paths < 2) throw std::invalid_argument("ergodic averages need at least 2 paths");
  if (x0.size() != static_cast<Eigen::Index>(model.dim())) {
    throw std::invalid_argument("x0 must have the model dimension");
  }
  ErgodicStats stats;
  stats.burn_in = config.burn_in > 0.0 ? config.burn_in : 10.0 / config.c;
  stats.burn_in_warning = stats.burn_in < 5.0 / config.c;

  const auto steps = static_cast<std::size_t>(std::llround(config.t / config.h));
  const auto burn_steps = static_cast<std::size_t>(std::llround(stats.burn_in / config.h));
  const double sqrt_h = std::sqrt(config.h);
  const std::size_t n = config.n_paths;
  std::vector<double> from_x0(n), stationary(n);

  auto run = [&](CounterRng rng, std::size_t burn) {
    const auto d = static_cast<Eigen::Index>(model.dim());
    Eigen::VectorXd x = x0, b(d), xi(d);
    auto advance = [&] {
      b.setZero();
      model.drift({x.data(), model.dim()}, {b.data(), model.dim()});
      rng.fill_normal({xi.data(), model.dim()});
      x += b * config.h + model.sigma() * (sqrt_h * xi);
      if (!x.allFinite()) throw SimulationError("non-finite state in ergodic average run");
    };
    for (std::size_t k = 0; k < burn; ++k) advance();
    // Trapezoid in time.
    double acc = 0.5 * g({x.data(), model.dim()});
    for (std::size_t k = 1; k <= steps; ++k) {
      advance();
      acc += (k == steps ? 0.5 : 1.0) * g({x.data(), model.dim()});
    }
    return acc / static_cast<double>(steps);
  };

  const CounterRng base(config.seed, 0);
  parallel_for(2 * n, config.threads, [&](std::size_t i) {
    if (i < n) {
      from_x0[i] = run(base.split(2 * i), 0);
    } else {
      stationary[i - n] = run(base.split(2 * (i - n) + 1), burn_steps);
    }
  });

  const double dn = static_cast<double>(n);
  stats.average_from_x0 = pairwise_sum(from_x0) / dn;
  stats.stationary_average = pairwise_sum(stationary) / dn;
  stats.bias_estimate = stats.average_from_x0 - stats.stationary_average;
  for (double& v : stationary) v = (v - stats.stationary_average) * (v - stats.stationary_average);
  stats.variance_estimate = pairwise_sum(stationary) / (dn - 1.0);
  return stats;
}

}  // namespace contraction
