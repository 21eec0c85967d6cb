// Serial vs OpenMP agent loop for full rounds on the m=20, d=50 quadratic
// federation and a larger RLR federation. Traces are bitwise identical across
// the two modes, so only wall time differs.

#include <benchmark/benchmark.h>

#include "fedmm/algorithms.hpp"
#include "fedmm/datagen.hpp"

using namespace fedmm;

namespace {

const MinimaxProblem& quadratic() {
  static const MinimaxProblem p = gen_quadratic({20, 50, 500, 1});
  return p;
}

const MinimaxProblem& rlr() {
  static const MinimaxProblem p = gen_rlr({32, 20, 400, 5.0, 1});
  return p;
}

void rounds(benchmark::State& state, const MinimaxProblem& problem, Algorithm algo,
            Execution exec) {
  AlgoConfig c;
  c.algo = algo;
  c.K = static_cast<int>(state.range(0));
  c.eta_x = c.eta_y = 1e-5;
  c.rounds = 10;
  c.exec = exec;
  MetricOptions metrics;
  metrics.timing = false;
  for (auto _ : state) {
    RunTrace t = run(problem, c, metrics);
    benchmark::DoNotOptimize(t.final_iterate.x.data());
  }
  state.SetItemsProcessed(state.iterations() * c.rounds);
}

void BM_QuadFedGdaGt_Serial(benchmark::State& s) {
  rounds(s, quadratic(), Algorithm::FedGDAGT, Execution::Serial);
}
void BM_QuadFedGdaGt_Parallel(benchmark::State& s) {
  rounds(s, quadratic(), Algorithm::FedGDAGT, Execution::Parallel);
}
void BM_QuadLocalSgda_Serial(benchmark::State& s) {
  rounds(s, quadratic(), Algorithm::LocalSGDA, Execution::Serial);
}
void BM_QuadLocalSgda_Parallel(benchmark::State& s) {
  rounds(s, quadratic(), Algorithm::LocalSGDA, Execution::Parallel);
}
void BM_RlrFedGdaGt_Serial(benchmark::State& s) {
  rounds(s, rlr(), Algorithm::FedGDAGT, Execution::Serial);
}
void BM_RlrFedGdaGt_Parallel(benchmark::State& s) {
  rounds(s, rlr(), Algorithm::FedGDAGT, Execution::Parallel);
}

}  // namespace

BENCHMARK(BM_QuadFedGdaGt_Serial)->Arg(1)->Arg(20)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_QuadFedGdaGt_Parallel)->Arg(1)->Arg(20)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_QuadLocalSgda_Serial)->Arg(20)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_QuadLocalSgda_Parallel)->Arg(20)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RlrFedGdaGt_Serial)->Arg(5)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RlrFedGdaGt_Parallel)->Arg(5)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
