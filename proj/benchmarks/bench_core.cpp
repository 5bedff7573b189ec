#include <benchmark/benchmark.h>

#include "ajd/criterion.hpp"
#include "ajd/datasets.hpp"
#include "ajd/solver.hpp"

namespace {

ajd::SyntheticDataset make_dataset(int n, int p) {
  return ajd::gen_synthetic({n, p, 0.1, 8});
}

void BM_TransformSet(benchmark::State& state) {
  const auto data = make_dataset(static_cast<int>(state.range(0)),
                                 static_cast<int>(state.range(1)));
  const auto b0 = ajd::whitener(data.set);
  for (auto _ : state) {
    auto d = ajd::transform_set(data.set, b0);
    benchmark::DoNotOptimize(d.raw().data());
  }
}
BENCHMARK(BM_TransformSet)->Args({100, 40})->Args({200, 40})->Args({100, 80});

void BM_RelativeGradient(benchmark::State& state) {
  const auto data = make_dataset(static_cast<int>(state.range(0)),
                                 static_cast<int>(state.range(1)));
  const auto d = ajd::transform_set(data.set, ajd::whitener(data.set));
  for (auto _ : state) {
    auto g = ajd::relative_gradient(d);
    benchmark::DoNotOptimize(g.data());
  }
}
BENCHMARK(BM_RelativeGradient)->Args({100, 40})->Args({200, 40})->Args({100, 80});

void BM_Gamma(benchmark::State& state) {
  const auto data = make_dataset(static_cast<int>(state.range(0)),
                                 static_cast<int>(state.range(1)));
  const auto d = ajd::transform_set(data.set, ajd::whitener(data.set));
  for (auto _ : state) {
    auto gm = ajd::gamma(d);
    benchmark::DoNotOptimize(gm.gamma().data());
  }
}
BENCHMARK(BM_Gamma)->Args({100, 40})->Args({200, 40});

void BM_ApproxHessianSolve(benchmark::State& state) {
  const auto data = make_dataset(64, static_cast<int>(state.range(0)));
  const auto d = ajd::transform_set(data.set, ajd::whitener(data.set));
  const auto gm = ajd::gamma(d);
  const auto g = ajd::relative_gradient(d);
  for (auto _ : state) {
    auto sol = ajd::approx_hessian_solve(gm, g);
    benchmark::DoNotOptimize(sol.x.data());
  }
}
BENCHMARK(BM_ApproxHessianSolve)->Arg(20)->Arg(40)->Arg(80);

// One full quasi-Newton iteration: gradient, Gamma, block solve, line search.
void BM_QuasiNewtonStep(benchmark::State& state) {
  const auto data = make_dataset(static_cast<int>(state.range(0)),
                                 static_cast<int>(state.range(1)));
  const auto b0 = ajd::whitener(data.set);
  const ajd::IncrementalLoss loss_fn(data.set);
  const auto d = ajd::transform_set(data.set, b0);
  const double current_loss = loss_fn(d, b0.log_abs_det());
  for (auto _ : state) {
    const ajd::Matrix g = ajd::relative_gradient(d);
    auto sol = ajd::approx_hessian_solve(ajd::gamma(d), g);
    auto ls = ajd::backtracking_search(loss_fn, d, b0.log_abs_det(), sol.x,
                                       current_loss, 30);
    benchmark::DoNotOptimize(ls.new_loss);
  }
}
BENCHMARK(BM_QuasiNewtonStep)->Args({100, 40})->Args({200, 40});

}  // namespace

BENCHMARK_MAIN();
