#include <doctest.h>

#include <cmath>
#include <vector>

#include "contraction/bounds.hpp"
#include "contraction/models.hpp"
#include "contraction/montecarlo.hpp"

using namespace contraction;

namespace {

DecaySeries synthetic(const std::function<double(double)>& m, double se_rel, std::size_t n = 21) {
  DecaySeries s;
  for (std::size_t k = 0; k < n; ++k) {
    const double t = 0.25 * static_cast<double>(k);
    s.times.push_back(t);
    s.mean.push_back(m(t));
    s.std_error.push_back(se_rel * m(t));
  }
  s.n_paths = 1000;
  return s;
}

}  // namespace

TEST_CASE("pairwise sum") {
  std::vector<double> v(1000, 0.1);
  CHECK(pairwise_sum(v) == doctest::Approx(100.0).epsilon(1e-14));
  CHECK(pairwise_sum(std::vector<double>{}) == 0.0);
  CHECK(pairwise_sum(std::vector<double>{3.0}) == 3.0);
}

TEST_CASE("fit recovers an exact exponential") {
  const auto s = synthetic([](double t) { return 5.0 * std::exp(-2.0 * t); }, 0.01);
  for (auto w : {FitWeighting::uniform, FitWeighting::inverse_variance}) {
    const RateFit fit = fit_decay_rate(s, w);
    CHECK(fit.rate == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(std::exp(fit.intercept) == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(fit.r_squared == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(fit.sigma_rate < 1e-10);
    CHECK(std::isnan(fit.sigma_jackknife));
  }
}

TEST_CASE("fit drops points at the noise floor") {
  auto s = synthetic([](double t) { return std::exp(-t); }, 0.01);
  for (std::size_t k = 10; k < s.mean.size(); ++k) s.std_error[k] = s.mean[k];
  const RateFit fit = fit_decay_rate(s);
  CHECK(fit.used.size() == 10);
  CHECK(fit.last == 9);
  for (std::size_t k = 2; k < s.mean.size(); ++k) s.std_error[k] = s.mean[k];
  CHECK_THROWS_AS(fit_decay_rate(s), FitFailure);
}

TEST_CASE("check_contraction") {
  SUBCASE("zero series passes") {
    const auto s = synthetic([](double) { return 0.0; }, 0.0);
    CHECK(check_contraction(s, 0.25).passed);
  }
  SUBCASE("exact decay at rate c passes, faster growth fails") {
    const auto s = synthetic([](double t) { return std::exp(-0.25 * t); }, 1e-9);
    CHECK(check_contraction(s, 0.25).passed);
    CHECK(check_contraction(s, 0.2).passed);
    const auto r = check_contraction(s, 0.3);
    CHECK_FALSE(r.passed);
    CHECK(r.worst_j == 0);
    CHECK(r.worst_k == s.mean.size() - 1);
  }
  SUBCASE("slack rules") {
    auto s = synthetic([](double t) { return std::exp(-0.25 * t); }, 1e-9);
    s.mean.back() *= 1.01;
    s.std_error.back() = 0.01 * s.mean.back();
    CHECK(check_contraction(s, 0.25, SlackRule::scaled).passed);
    CHECK_FALSE(check_contraction(s, 0.25, SlackRule::literal).passed);
  }
  const auto s = synthetic([](double t) { return std::exp(-t); }, 0.0);
  CHECK_THROWS_AS(check_contraction(s, 0.0), std::domain_error);
}

TEST_CASE("ensemble with equal starts") {
  const auto m = make_model("ou");
  CouplingConfig c;
  c.kind = CouplingKind::reflection;
  c.T = 0.5;
  c.save_times = uniform_save_times(0.5, 0.25);
  c.n_paths = 100;
  c.x0 = m.x0;
  c.y0 = m.x0;
  const auto s = estimate_mean_distance(m.model, c, identity_distances(1));
  for (double v : s.mean) CHECK(v == 0.0);
  CHECK_FALSE(s.note.empty());
  c.n_paths = 10;
  CHECK_THROWS_AS(estimate_mean_distance(m.model, c, identity_distances(1)), std::invalid_argument);
}

TEST_CASE("ensembles are independent of the thread count") {
  const auto m = make_model("ou");
  CouplingConfig c;
  c.kind = CouplingKind::reflection;
  c.T = 1.0;
  c.save_times = uniform_save_times(1.0, 0.25);
  c.n_paths = 400;
  c.x0 = m.x0;
  c.y0 = m.y0;
  c.threads = 1;
  const auto a = estimate_mean_distance(m.model, c, identity_distances(1));
  c.threads = 4;
  const auto b = estimate_mean_distance(m.model, c, identity_distances(1));
  CHECK(a.mean == b.mean);
  CHECK(a.std_error == b.std_error);
  CHECK(a.batch_mean == b.batch_mean);
  CHECK(a.batches == 20);
  std::size_t total = 0;
  for (auto n : a.batch_size) total += n;
  CHECK(total == 400);
}

TEST_CASE("jackknife error on a reflection ensemble") {
  const auto m = make_model("ou");
  CouplingConfig c;
  c.kind = CouplingKind::reflection;
  c.T = 4.0;
  c.save_times = uniform_save_times(4.0, 0.25);
  c.n_paths = 2000;
  c.x0 = m.x0;
  c.y0 = m.y0;
  const auto s = estimate_mean_distance(m.model, c, identity_distances(1));
  const RateFit fit = fit_decay_rate(s);
  CHECK(std::isfinite(fit.sigma_jackknife));
  CHECK(fit.sigma_jackknife > 0.0);
  CHECK(fit.rate > 0.25);
  CHECK(fit.rate < 1.0);
}

TEST_CASE("ergodic averages") {
  const auto m = make_model("ou");
  ErgodicConfig cfg;
  cfg.t = 20.0;
  cfg.n_paths = 50;
  cfg.c = 0.25;
  const Eigen::VectorXd x0 = Eigen::VectorXd::Constant(1, 2.0);
  const auto flat = ergodic_average_stats(m.model, [](std::span<const double>) { return 3.0; }, x0, cfg);
  CHECK(flat.average_from_x0 == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(flat.variance_estimate == doctest::Approx(0.0).scale(1.0));
  CHECK_FALSE(flat.burn_in_warning);
  CHECK(flat.burn_in == 40.0);

  cfg.t = 100.0;
  cfg.n_paths = 200;
  const auto lin = ergodic_average_stats(m.model, [](std::span<const double> x) { return x[0]; }, x0, cfg);
  // x is 2-Lipschitz with respect to d_f since f(r) >= r / 2.
  CHECK(lin.variance_estimate <= ergodic_average_bounds(cfg.t, 0.25, 2.0, 1.0).variance);
  CHECK(std::abs(lin.stationary_average) < 0.2);

  cfg.burn_in = 1.0;
  cfg.t = 1.0;
  CHECK(ergodic_average_stats(m.model, [](std::span<const double>) { return 0.0; }, x0, cfg).burn_in_warning);
}
