// Serial reference vs OpenMP replicate loop on the same simulation task.

#include <benchmark/benchmark.h>

#include "maxstable/field.hpp"
#include "maxstable/parallel.hpp"

namespace {

using namespace maxstable;

const FieldSimulator& simulator() {
  static const FieldSimulator sim(ModelSpec::moving_maximum(KernelSpec::truncated_gaussian(2, 1.0, 2.0)),
                                  LatticeWindow::cube(2, 32));
  return sim;
}

double replicate(std::size_t r) {
  Rng rng = Rng::for_stream(7, streams::kReplicate, r);
  const auto f = simulator().sample(rng);
  return f.values.front();
}

void BM_Serial(benchmark::State& state) {
  const auto count = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    auto out = serial_replicates(count, replicate);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_Parallel(benchmark::State& state) {
  const auto count = static_cast<std::size_t>(state.range(0));
  const int workers = static_cast<int>(state.range(1));
  for (auto _ : state) {
    auto out = parallel_replicates(count, workers, replicate);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

BENCHMARK(BM_Serial)->Arg(64)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_Parallel)->Args({64, 1})->Args({64, 2})->Args({64, 4})->Args({64, 8})->Unit(benchmark::kMillisecond)->UseRealTime();

}  // namespace

BENCHMARK_MAIN();
