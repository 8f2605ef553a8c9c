// Serial reference loop against the OpenMP kernel on the reference parameters.

#include "drawdown/dual.hpp"
#include "drawdown/illposed.hpp"
#include "drawdown/primal.hpp"
#include "drawdown/sim.hpp"

#include <benchmark/benchmark.h>

using namespace drawdown;

namespace {

SimConfig config(int paths) {
    const auto sol = solve(reference_params());
    const auto rb = region_boundaries(sol);
    SimConfig c;
    c.t_end = 1.0;
    c.dt = 1e-3;
    c.n_paths = paths;
    c.seed = 1;
    c.cbar0 = 2.0;
    c.w0 = 0.5 * (rb.x_kink + rb.x_one) * c.cbar0;
    return c;
}

void BM_SimulateSerial(benchmark::State& state) {
    const auto sol = solve(reference_params());
    const auto cfg = config(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(simulate_serial(sol, cfg, OptimalStrategy{}));
    state.SetItemsProcessed(state.iterations() * state.range(0) * 1000);
}

void BM_SimulateParallel(benchmark::State& state) {
    const auto sol = solve(reference_params());
    const auto cfg = config(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(simulate(sol, cfg, OptimalStrategy{}));
    state.SetItemsProcessed(state.iterations() * state.range(0) * 1000);
}

void BM_InvertDual(benchmark::State& state) {
    const auto sol = solve(reference_params());
    const auto rb = region_boundaries(sol);
    double x = rb.x_floor;
    const double step = (rb.a - rb.x_floor) / 1024.0;
    for (auto _ : state) {
        x += step;
        if (x >= rb.a) x = rb.x_floor + step;
        benchmark::DoNotOptimize(invert_dual(sol, x));
    }
}

void BM_Demonstrate(benchmark::State& state) {
    auto p = reference_params();
    p.R = 0.5;
    IllPosedConfig cfg;
    cfg.n_paths = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(demonstrate(p, cfg));
}

}  // namespace

BENCHMARK(BM_SimulateSerial)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SimulateParallel)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_InvertDual);
BENCHMARK(BM_Demonstrate)->Arg(1000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
