#include <benchmark/benchmark.h>

#include "nsfide/resolvent.hpp"

using namespace nsfide;

static void BM_ResolventTable(benchmark::State& state) {
  const auto b = resolvent::memory_kernel_lookup("exp_decay", {1.0, 2.0});
  const TimeGrid g(0.75, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    resolvent::ResolventTable table(32, b, g);
    benchmark::DoNotOptimize(table.entry(31, g.n_steps()));
  }
}
BENCHMARK(BM_ResolventTable)->Arg(384)->Arg(768);
