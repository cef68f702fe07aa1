#include <benchmark/benchmark.h>

#include <vector>

#include "contraction/distance.hpp"
#include "contraction/models.hpp"
#include "contraction/rng.hpp"
#include "contraction/sde.hpp"
#include "contraction/spectral.hpp"

using namespace contraction;

static void BM_BuildDistanceMinorant(benchmark::State& state) {
  const auto p = profile_from_bounds(2.0, 1.0, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(build_distance(p, static_cast<std::size_t>(state.range(0))).rate());
}
BENCHMARK(BM_BuildDistanceMinorant)->Arg(1024)->Arg(8192);

static void BM_EvalF(benchmark::State& state) {
  const auto df = build_distance(profile_from_bounds(2.0, 1.0, 1.0));
  double r = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(df.f(r));
    r = r > 10.0 ? 0.0 : r + 1e-3;
  }
}
BENCHMARK(BM_EvalF);

static void BM_PhiloxNormals(benchmark::State& state) {
  CounterRng rng(1, 0);
  std::vector<double> out(1024);
  for (auto _ : state) {
    rng.fill_normal(out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * 1024);
}
BENCHMARK(BM_PhiloxNormals);

static void BM_PairStep(benchmark::State& state, const char* model, CouplingKind kind) {
  const auto m = make_model(model);
  CouplingConfig c;
  c.kind = kind;
  c.T = 1.0;
  c.save_times = {0.0};
  c.x0 = m.x0;
  c.y0 = m.y0;
  c.delta = 0.2;
  PairStepper stepper(m.model, c);
  CounterRng rng(3, 0);
  std::vector<double> noise(stepper.noise_dim());
  PairState s = initial_state(m.model, c);
  for (auto _ : state) {
    rng.fill_normal(noise);
    stepper.step(s, noise);
    if (s.all_merged()) s = initial_state(m.model, c);
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK_CAPTURE(BM_PairStep, ou_reflection, "ou", CouplingKind::reflection);
BENCHMARK_CAPTURE(BM_PairStep, double_well_reflection, "double-well", CouplingKind::reflection);
BENCHMARK_CAPTURE(BM_PairStep, product_componentwise, "product-ou", CouplingKind::componentwise);
BENCHMARK_CAPTURE(BM_PairStep, mean_field_componentwise, "mean-field", CouplingKind::componentwise);

static void BM_DirichletEigen(benchmark::State& state) {
  const auto du = doublewell_potential(1.0, 4.0, 0.5, 1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(lowest_eigenvalue(assemble_dirichlet_operator(du, 14.0, 2000)));
  }
}
BENCHMARK(BM_DirichletEigen);
BENCHMARK_MAIN();
