// Serial vs OpenMP panel integration for the moment table, the Gram matrix and Cauchy transforms.
#include <benchmark/benchmark.h>

#include "matbiorth/biorth.hpp"
#include "matbiorth/corpus.hpp"

using namespace matbiorth;

namespace {

const WeightModel<double>& model() {
  static const auto m = corpus::freud_noncommuting<double>(true);
  return m;
}

const BiorthSystem<double>& system() {
  static const auto sys = build_biorth<double>(moments_by_quadrature<double>(model(), 15), 6);
  return sys;
}

void BM_Moments(benchmark::State& state) {
  const bool parallel = state.range(0) != 0;
  for (auto _ : state) benchmark::DoNotOptimize(moments_by_quadrature<double>(model(), 20, 1e-13, parallel));
  state.SetLabel(parallel ? "parallel" : "serial");
}

void BM_Gram(benchmark::State& state) {
  const bool parallel = state.range(0) != 0;
  for (auto _ : state) benchmark::DoNotOptimize(gram_by_quadrature<double>(model(), system(), 6, 1e-13, parallel));
  state.SetLabel(parallel ? "parallel" : "serial");
}

void BM_SecondKind(benchmark::State& state) {
  const bool parallel = state.range(0) != 0;
  const SecondKindEvaluator<double> ev(model(), system(), 1e-13, parallel);
  const std::complex<double> z(-1.0, 2.0);
  for (auto _ : state) benchmark::DoNotOptimize(ev.evaluate(z, 0, 6, 2));
  state.SetLabel(parallel ? "parallel" : "serial");
}

}  // namespace

BENCHMARK(BM_Moments)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Gram)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SecondKind)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
