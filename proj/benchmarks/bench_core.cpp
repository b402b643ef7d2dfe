#include <benchmark/benchmark.h>

#include "favar/moments.hpp"
#include "favar/pipeline.hpp"
#include "favar/simulate.hpp"
#include "favar/trunc.hpp"
#include "favar/varlasso.hpp"

using namespace favar;

namespace {

SimulatedPanel panel(Index n, Index p) {
  DgpSpec spec;
  spec.n = n;
  spec.p = p;
  spec.var_design = VarDesign::banded;
  spec.innovation = Innovation::student(3.0);
  spec.seed = 7;
  return simulate_panel(spec);
}

}  // namespace

static void BM_BuildGram(benchmark::State& state) {
  const auto sim = panel(200, state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(build_gram(sim.xi, 2));
}
BENCHMARK(BM_BuildGram)->Arg(50)->Arg(100)->Arg(200);

static void BM_LassoRow(benchmark::State& state) {
  const auto sim = panel(200, state.range(0));
  const auto G = build_gram(sim.xi, 1);
  const double lambda = 0.05 * lambda_max(G);
  for (auto _ : state) benchmark::DoNotOptimize(lasso_row(G, 0, lambda));
}
BENCHMARK(BM_LassoRow)->Arg(50)->Arg(100)->Arg(200);

static void BM_FitVar(benchmark::State& state) {
  const auto sim = panel(200, state.range(0));
  const auto G = build_gram(sim.xi, 1);
  const double lambda = 0.05 * lambda_max(G);
  const auto threads = static_cast<std::size_t>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(fit_var(G, lambda, {}, threads));
}
BENCHMARK(BM_FitVar)->Args({100, 1})->Args({100, 4})->Args({200, 4});

static void BM_CvTau(benchmark::State& state) {
  const auto sim = panel(200, state.range(0));
  const PanelSeries x(sim.xi);
  const auto s = mad_scales(x);
  const auto grid = build_tau_grid(x, s);
  for (auto _ : state) benchmark::DoNotOptimize(cv_tau(x, s, 1, grid));
}
BENCHMARK(BM_CvTau)->Arg(50)->Arg(100);

static void BM_Fit(benchmark::State& state) {
  DgpSpec spec;
  spec.n = 200;
  spec.p = state.range(0);
  spec.var_design = VarDesign::banded;
  spec.factor_design = FactorDesign::var1;
  spec.seed = 3;
  const auto sim = simulate_panel(spec);
  FitOptions opts;
  opts.r = 3;
  for (auto _ : state) benchmark::DoNotOptimize(fit(sim.x, opts));
}
BENCHMARK(BM_Fit)->Arg(50)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
