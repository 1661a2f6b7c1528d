// bench_grid.cpp - OpenMP composition kernel vs the serial per-row reference

#include <benchmark/benchmark.h>

#include "nonmark/builtin_models.hpp"
#include "nonmark/measure.hpp"

using namespace nonmark;

namespace {

dynamics::TimeLocalModel pick(int which)
{
    switch (which) {
    case 0: return dynamics::damped_jc({5.0, 1.0});
    case 1: return dynamics::spin_bath({1, 1.0});
    default: return dynamics::detuned_jc({0.3, 1.0, 10.0});
    }
}

void run(benchmark::State& state, bool serial)
{
    const auto model = pick(static_cast<int>(state.range(0)));
    const auto n = static_cast<std::size_t>(state.range(1));
    const auto region = measure::representative_region(model);
    const auto t1 = measure::cell_centres(region.t1_lo, region.t1_hi, n);
    const auto dt = measure::cell_centres(region.dt_lo, region.dt_hi, n);
    std::size_t steps = 0;
    for (auto _ : state) {
        const auto g = serial ? measure::ncp_grid_serial(model, t1, dt) : measure::ncp_grid(model, t1, dt);
        steps = g.stats.steps;
        benchmark::DoNotOptimize(g.values.data());
    }
    state.counters["cells"] = static_cast<double>(n * n);
    state.counters["steps"] = static_cast<double>(steps);
    state.SetLabel(model.descriptor().family);
}

void BM_GridParallel(benchmark::State& s) { run(s, false); }
void BM_GridSerial(benchmark::State& s) { run(s, true); }

} // namespace

BENCHMARK(BM_GridParallel)->ArgsProduct({{0, 1, 2}, {50, 100}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GridSerial)->ArgsProduct({{0, 1, 2}, {50, 100}})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
