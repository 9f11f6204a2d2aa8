#include <benchmark/benchmark.h>

#include "qplab/localization.hpp"
#include "qplab/spectral.hpp"
#include "qplab/sublevel.hpp"

namespace {

using namespace qplab;

OperatorSpec maryland(double eps) {
  return OperatorSpec(MeromorphicPotential::maryland(), ToeplitzKernel::exponential(1.0, 0.5, 16), eps,
                      Frequency(0.6180339887498949, 0.1, 1.0));
}

void BM_BoundedFactor(benchmark::State& state) {
  const auto spec = maryland(0.05);
  const auto N = state.range(0);
  for (auto _ : state) benchmark::DoNotOptimize(bounded_factor(spec, TorusPoint(0.1), IndexWindow::first(N), 0.3));
}
BENCHMARK(BM_BoundedFactor)->RangeMultiplier(4)->Range(16, 1024);

void BM_LogDet(benchmark::State& state) {
  const auto spec = maryland(0.05);
  const Matrix B = bounded_factor(spec, TorusPoint(0.1), IndexWindow::first(state.range(0)), 0.3);
  for (auto _ : state) benchmark::DoNotOptimize(logdet(B));
}
BENCHMARK(BM_LogDet)->RangeMultiplier(4)->Range(16, 1024);

void BM_Green(benchmark::State& state) {
  const auto spec = maryland(0.05);
  const auto N = state.range(0);
  for (auto _ : state) benchmark::DoNotOptimize(green(spec, TorusPoint(0.1), IndexWindow::first(N), 0.3));
}
BENCHMARK(BM_Green)->RangeMultiplier(2)->Range(32, 256);

void BM_PotentialMeasure(benchmark::State& state) {
  const auto p = MeromorphicPotential::maryland();
  const auto depth = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(potential_measure(p, 0.7, 1e-3, depth));
}
BENCHMARK(BM_PotentialMeasure)->DenseRange(12, 24, 4);

void BM_EigenDecay(benchmark::State& state) {
  const auto spec = maryland(0.05);
  for (auto _ : state) benchmark::DoNotOptimize(eigen_decay(spec, TorusPoint(0.1), state.range(0)));
}
BENCHMARK(BM_EigenDecay)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
