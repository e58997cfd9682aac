// Serial reference paths against the OpenMP kernels. On one core the two
// should be close; the gap grows with OMP_NUM_THREADS.

#include <benchmark/benchmark.h>

#include "tbslab/diagnostics.hpp"
#include "tbslab/estimators.hpp"
#include "tbslab/gaussian_field.hpp"

using namespace tbslab;

namespace {

std::vector<std::size_t> first_cells(std::size_t n) {
  std::vector<std::size_t> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = i;
  return v;
}

void BM_CovarianceBlock(benchmark::State& state) {
  const GridSpec g(64, 64);
  const auto rows = first_cells(g.cell_count());
  const auto cols = first_cells(static_cast<std::size_t>(state.range(0)));
  const auto exec = state.range(1) ? Execution::parallel : Execution::serial;
  for (auto _ : state) {
    benchmark::DoNotOptimize(covariance_block(Kernel{}, g, rows, cols, exec));
  }
  state.SetLabel(state.range(1) ? "openmp" : "serial");
}
BENCHMARK(BM_CovarianceBlock)->ArgsProduct({{50, 500}, {0, 1}})->Unit(benchmark::kMillisecond);

void BM_CovarianceBlockReference(benchmark::State& state) {
  const GridSpec g(64, 64);
  const auto rows = first_cells(g.cell_count());
  const auto cols = first_cells(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(covariance_block_reference(Kernel{}, g, rows, cols));
  }
}
BENCHMARK(BM_CovarianceBlockReference)->Arg(50)->Arg(500)->Unit(benchmark::kMillisecond);

void BM_EvaluateRisks(benchmark::State& state) {
  auto bed = Testbed::make(EnvironmentMask::all_free(GridSpec(32, 32)), {}, 0.01);
  bed.exec = state.range(0) ? Execution::parallel : Execution::serial;
  const std::vector<EstimatorSpec> specs{EstimatorSpec::gp(bed.kernel, bed.noise_var),
                                         EstimatorSpec::idw(2.0)};
  for (auto _ : state) {
    benchmark::DoNotOptimize(evaluate_risks(bed, specs, SamplerConfig::st_tbs(50), 32, 1));
  }
  state.SetLabel(state.range(0) ? "openmp" : "serial");
}
BENCHMARK(BM_EvaluateRisks)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_ExpectedMutualInformation(benchmark::State& state) {
  const auto mask = EnvironmentMask::all_free(GridSpec(64, 64));
  const auto exec = state.range(0) ? Execution::parallel : Execution::serial;
  const SetStatistic stat = MutualInfoStat{{}, 0.01};
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        expected_statistic(SamplerConfig::st_tbs(50), mask, stat, 200, 1, exec));
  }
  state.SetLabel(state.range(0) ? "openmp" : "serial");
}
BENCHMARK(BM_ExpectedMutualInformation)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
