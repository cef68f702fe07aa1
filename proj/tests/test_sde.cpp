#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "contraction/models.hpp"
#include "contraction/montecarlo.hpp"
#include "contraction/sde.hpp"

using namespace contraction;

namespace {

CouplingConfig base_config(const RegisteredModel& m, CouplingKind kind) {
  CouplingConfig c;
  c.kind = kind;
  c.h = 1e-3;
  c.T = 1.0;
  c.save_times = {0.0, 0.5, 1.0};
  c.n_paths = 100;
  c.x0 = m.x0;
  c.y0 = m.y0;
  return c;
}

ModelSpec planar_ou() {
  return ModelSpec("planar", {ModelBlock{2, [](std::span<const double> x, std::span<double> out) {
                                            out[0] = -0.5 * x[0];
                                            out[1] = -x[1];
                                          }}},
                   Eigen::MatrixXd::Identity(2, 2));
}

}  // namespace

TEST_CASE("ramp") {
  const double delta = 0.2;
  CHECK(ramp_lambda(delta, delta / 4.0).lambda == 0.0);
  CHECK(ramp_lambda(delta, delta / 4.0).pi == 1.0);
  CHECK(ramp_lambda(delta, delta).lambda == 1.0);
  const Ramp mid = ramp_lambda(delta, 0.75 * delta);
  CHECK(mid.lambda == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(mid.pi == doctest::Approx(std::sqrt(3.0) / 2.0).epsilon(1e-14));
  for (int i = 0; i <= 1000; ++i) {
    const Ramp r = ramp_lambda(delta, 1.2 * delta * i / 1000.0);
    CHECK(std::abs(r.lambda * r.lambda + r.pi * r.pi - 1.0) <= 2.0 * std::numeric_limits<double>::epsilon());
  }
}

TEST_CASE("single steps match the difference equations") {
  const auto m = make_model("ou");
  const double h = 1e-3;
  SUBCASE("synchronous with equal states stays equal") {
    auto c = base_config(m, CouplingKind::synchronous);
    c.y0 = c.x0;
    PairState s = step_pair(m.model, c, initial_state(m.model, c), std::vector<double>{0.7});
    CHECK(s.x == s.y);
  }
  SUBCASE("reflection difference") {
    auto c = base_config(m, CouplingKind::reflection);
    const double xi = 0.3;
    PairState s = step_pair(m.model, c, initial_state(m.model, c), std::vector<double>{xi});
    const double z = s.x[0] - s.y[0];
    CHECK(z == doctest::Approx(1.0 - 0.5 * h + 2.0 * std::sqrt(h) * xi).epsilon(1e-14));
  }
  SUBCASE("synchronous difference") {
    auto c = base_config(m, CouplingKind::synchronous);
    PairState s = step_pair(m.model, c, initial_state(m.model, c), std::vector<double>{-1.4});
    CHECK(s.x[0] - s.y[0] == doctest::Approx(1.0 - 0.5 * h).epsilon(1e-14));
  }
  SUBCASE("componentwise below the band is synchronous") {
    auto c = base_config(m, CouplingKind::componentwise);
    c.delta = 0.2;
    c.x0[0] = 0.05;
    PairState s = step_pair(m.model, c, initial_state(m.model, c), std::vector<double>{1.1, -0.4});
    CHECK(s.x[0] - s.y[0] == doctest::Approx(0.05 * (1.0 - 0.5 * h)).epsilon(1e-13));
  }
  SUBCASE("sign change merges under reflection") {
    auto c = base_config(m, CouplingKind::reflection);
    PairState s = step_pair(m.model, c, initial_state(m.model, c), std::vector<double>{-30.0});
    CHECK(s.all_merged());
    CHECK(s.x == s.y);
  }
}

TEST_CASE("reflected increment is an exact involution") {
  const ModelSpec model = planar_ou();
  CouplingConfig c;
  c.kind = CouplingKind::reflection;
  c.h = 1e-2;
  c.T = 1.0;
  c.save_times = {0.0};
  c.x0 = Eigen::Vector2d(1.0, 2.0);
  c.y0 = Eigen::Vector2d(-0.5, 0.25);
  PairState s = initial_state(model, c);
  const Eigen::Vector2d xi(0.3, -0.8);
  PairState n = step_pair(model, c, s, std::vector<double>{xi[0], xi[1]});
  const Eigen::Vector2d by(-0.5 * s.y[0], -s.y[1]);
  const Eigen::Vector2d dy = (n.y - s.y - by * c.h) / std::sqrt(c.h);
  const Eigen::Vector2d e = (s.x - s.y).normalized();
  const Eigen::Matrix2d P = Eigen::Matrix2d::Identity() - 2.0 * e * e.transpose();
  CHECK((dy - P * xi).norm() < 1e-12);
  CHECK((P * (P * xi) - xi).norm() < 1e-15);
}

TEST_CASE("merged pairs never unmerge under reflection") {
  const auto m = make_model("ou");
  auto c = base_config(m, CouplingKind::reflection);
  PairState s = initial_state(m.model, c);
  PairStepper stepper(m.model, c);
  stepper.step(s, std::vector<double>{-30.0});
  REQUIRE(s.all_merged());
  CounterRng rng(5, 0);
  for (int i = 0; i < 1000; ++i) {
    stepper.step(s, std::vector<double>{rng.normal()});
    CHECK(s.x == s.y);
  }
}

TEST_CASE("componentwise merged block has lambda 0") {
  const auto m = make_model("product-ou");
  auto c = base_config(m, CouplingKind::componentwise);
  c.x0 = Eigen::Vector2d(1.0, 0.5);
  c.y0 = Eigen::Vector2d(0.0, 0.5);
  PairState s = initial_state(m.model, c);
  CHECK(s.merged_blocks[1] == 1);
  s = step_pair(m.model, c, s, std::vector<double>{0.1, 0.2, 0.3, 0.4});
  CHECK(s.x[1] == s.y[1]);
}

TEST_CASE("synchronous OU difference decays deterministically") {
  const auto m = make_model("ou");
  auto c = base_config(m, CouplingKind::synchronous);
  c.T = 2.0;
  c.save_times = {0.0, 2.0};
  const auto id = identity_distances(1);
  const DecaySeries s = estimate_mean_distance(m.model, c, id);
  CHECK(s.mean[1] == doctest::Approx(std::pow(1.0 - 0.5e-3, 2000)).epsilon(1e-12));
  CHECK(std::abs(s.mean[1] - std::exp(-1.0)) < 1e-3);
  CHECK(s.std_error[1] < 1e-14);
}

TEST_CASE("equal starts give zero distances") {
  const auto m = make_model("ou");
  for (auto kind : {CouplingKind::synchronous, CouplingKind::reflection, CouplingKind::componentwise}) {
    auto c = base_config(m, kind);
    c.y0 = c.x0;
    const auto rec = simulate_pair(m.model, c, identity_distances(1), CounterRng(1, 0));
    for (double v : rec.distance) CHECK(v == 0.0);
  }
}

TEST_CASE("reflection preserves the marginal law") {
  // Y marginals under reflection and synchronous couplings, independent
  // streams, against each other and the exact OU moments.
  const auto m = make_model("ou");
  const int n = 10000;
  const double t = 1.0;
  auto moments = [&](CouplingKind kind, std::uint64_t seed) {
    auto c = base_config(m, kind);
    double s1 = 0.0, s2 = 0.0;
    for (int p = 0; p < n; ++p) {
      PairState s = initial_state(m.model, c);
      PairStepper stepper(m.model, c);
      CounterRng rng(seed, static_cast<std::uint64_t>(p));
      std::vector<double> noise(stepper.noise_dim());
      for (int k = 0; k < 1000; ++k) {
        rng.fill_normal(noise);
        stepper.step(s, noise);
      }
      s1 += s.y[0];
      s2 += s.y[0] * s.y[0];
    }
    const double mean = s1 / n;
    return std::pair{mean, s2 / n - mean * mean};
  };
  const auto [m_ref, v_ref] = moments(CouplingKind::reflection, 11);
  const auto [m_syn, v_syn] = moments(CouplingKind::synchronous, 12);
  const double exact_var = 1.0 - std::exp(-t);
  const double se_mean = std::sqrt(exact_var / n);
  const double se_var = exact_var * std::sqrt(2.0 / n);
  CHECK(std::abs(m_ref - m_syn) < 3.0 * std::sqrt(2.0) * se_mean);
  CHECK(std::abs(v_ref - v_syn) < 3.0 * std::sqrt(2.0) * se_var);
  CHECK(std::abs(m_ref) < 3.0 * se_mean);
  CHECK(std::abs(v_ref - exact_var) < 3.0 * se_var);
}

TEST_CASE("componentwise blocks match single-block reflection runs") {
  const auto prod = make_model("product-ou", {{"K2", 1.0}});
  const auto single = make_model("ou");
  auto cp = base_config(prod, CouplingKind::componentwise);
  cp.n_paths = 4000;
  auto cs = base_config(single, CouplingKind::reflection);
  cs.n_paths = 4000;
  cs.seed = 99;
  const DecaySeries a = estimate_mean_distance(
      prod.model, cp, std::vector<BlockDistance>{{[](double r) { return r; }, 1.0}, {[](double) { return 0.0; }, 0.0}});
  const DecaySeries b = estimate_mean_distance(single.model, cs, identity_distances(1));
  for (std::size_t k = 1; k < a.mean.size(); ++k) {
    CHECK(std::abs(a.mean[k] - b.mean[k]) < 4.0 * std::hypot(a.std_error[k], b.std_error[k]));
  }
}

TEST_CASE("config validation") {
  const auto m = make_model("ou");
  auto c = base_config(m, CouplingKind::componentwise);
  c.eps_merge = c.delta;
  CHECK_THROWS_AS(c.validate(m.model), std::invalid_argument);
  c = base_config(m, CouplingKind::reflection);
  c.save_times = {0.0, 2.0};
  CHECK_THROWS_AS(c.validate(m.model), std::invalid_argument);
  c = base_config(m, CouplingKind::reflection);
  c.h = 0.3;
  CHECK_THROWS_AS(c.validate(m.model), std::invalid_argument);
  c = base_config(m, CouplingKind::reflection);
  c.x0 = Eigen::VectorXd::Zero(2);
  CHECK_THROWS_AS(c.validate(m.model), std::invalid_argument);
  CHECK(parse_coupling_kind("componentwise") == CouplingKind::componentwise);
  CHECK_THROWS(parse_coupling_kind("maximal"));
}

TEST_CASE("non-finite drift aborts with a state dump") {
  const ModelSpec bad("bad", {ModelBlock{1, [](std::span<const double> x, std::span<double> out) {
                                           out[0] = x[0] > 1.0 ? std::numeric_limits<double>::quiet_NaN() : -x[0];
                                         }}},
                      Eigen::MatrixXd::Identity(1, 1));
  CouplingConfig c;
  c.kind = CouplingKind::synchronous;
  c.T = 1.0;
  c.save_times = {0.0, 1.0};
  c.x0 = Eigen::VectorXd::Constant(1, 2.0);
  c.y0 = Eigen::VectorXd::Zero(1);
  CHECK_THROWS_AS(simulate_pair(bad, c, identity_distances(1), CounterRng(1, 0)), SimulationError);
}

TEST_CASE("heat equation model drift") {
  const auto m = make_model("heat-eq", {{"d", 4.0}, {"L", 1.0}});
  CHECK(m.model.dim() == 3);
  std::vector<double> x = {1.0, 0.0, 0.0}, out(3);
  m.model.drift(x, out);
  CHECK(out[0] == doctest::Approx(16.0 * (-2.0) + 1.0));
  CHECK(out[1] == doctest::Approx(16.0));
  CHECK(out[2] == 0.0);
}
