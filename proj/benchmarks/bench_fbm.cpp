#include <benchmark/benchmark.h>

#include "nsfide/fbm.hpp"

using namespace nsfide;

static void BM_CholeskyFactor(benchmark::State& state) {
  const HurstParameter h(0.75);
  const TimeGrid g(1.0, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    fbm::CholeskyFbmSampler sampler(g, h);
    benchmark::DoNotOptimize(sampler);
  }
}
BENCHMARK(BM_CholeskyFactor)->Arg(128)->Arg(384)->Arg(512);

static void BM_CholeskySample(benchmark::State& state) {
  const HurstParameter h(0.75);
  const TimeGrid g(1.0, static_cast<std::size_t>(state.range(0)));
  const fbm::CholeskyFbmSampler sampler(g, h);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    auto path = sampler.sample(++seed);
    benchmark::DoNotOptimize(path.values.back());
  }
}
BENCHMARK(BM_CholeskySample)->Arg(384)->Arg(1024);

static void BM_KernelEval(benchmark::State& state) {
  const HurstParameter h(0.7);
  double s = 0.1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(fbm::kernel_K(1.0, s, h));
    s = s < 0.9 ? s + 1e-4 : 0.1;
  }
}
BENCHMARK(BM_KernelEval);
