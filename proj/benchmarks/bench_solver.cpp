#include <benchmark/benchmark.h>

#include "nsfide/solver.hpp"

using namespace nsfide;

namespace {

solver::ModelSpec bench_model(std::size_t steps_per_delay) {
  solver::ModelSpec m;
  m.hurst = 0.75;
  m.horizon = 0.75;
  m.delay = 0.25;
  m.blocks = 3;
  m.n_modes = 32;
  m.n_points = 127;
  m.dt = m.delay / static_cast<double>(steps_per_delay);
  m.g = spectral::registry_lookup("scaled_tanh", {0.1, 1.0}, true);
  m.f = spectral::registry_lookup("scaled_tanh", {0.5, 1.0}, true);
  m.sigma = spectral::registry_lookup("scaled_tanh", {0.5, 1.0});
  m.b = resolvent::memory_kernel_lookup("exp_decay", {1.0, 2.0});
  m.derivative_depth = 2;
  m.phi.field = spectral::SpectralField(m.n_modes);
  for (std::size_t n = 0; n < m.n_modes; ++n)
    m.phi.field.coeffs[n] = 1.0 / static_cast<double>((n + 1) * (n + 1));
  return m;
}

}  // namespace

static void BM_SolvePath(benchmark::State& state) {
  const solver::SolverContext ctx(bench_model(static_cast<std::size_t>(state.range(0))));
  solver::PathRun run(ctx);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    run.start(++seed);
    run.solve_all();
    benchmark::DoNotOptimize(run.x()(0, static_cast<Eigen::Index>(ctx.n_steps())));
  }
}
BENCHMARK(BM_SolvePath)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);
