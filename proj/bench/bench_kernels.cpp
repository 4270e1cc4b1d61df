// Serial vs OpenMP timings for the three parallel kernels.
// Arg 0 selects the serial reference, 1 the parallel path.
#include <benchmark/benchmark.h>

#include "mcache/approx_mdp.hpp"
#include "mcache/exact_solver.hpp"
#include "mcache/simulator.hpp"

using namespace mcache;

namespace {

ScenarioConfig instance(std::size_t caches, int segments) {
    ScenarioConfig sc;
    sc.segment_count = segments;
    sc.cache_positions = place_caches_disjoint(caches, sc.cell_radius, sc.cache_service_radius, 1);
    return sc;
}

Execution mode(const benchmark::State& state) {
    return state.range(0) == 0 ? Execution::serial : Execution::parallel;
}

void BM_ValueIteration(benchmark::State& state) {
    const auto sc = instance(3, 3);
    const auto pool = sample_fading_pool(sc, 200, 1);
    for (auto _ : state) benchmark::DoNotOptimize(value_iteration(sc, 6, pool, mode(state)));
}

void BM_ReferenceValues(benchmark::State& state) {
    const auto sc = instance(5, 4);
    const auto pool = sample_fading_pool(sc, 500, 1);
    for (auto _ : state) benchmark::DoNotOptimize(build_reference_values(sc, 21, pool, mode(state)));
}

void BM_ReplicateCosts(benchmark::State& state) {
    auto sc = instance(5, 4);
    sc.request_intensity = 8.0;
    const auto pool = sample_fading_pool(sc, 500, 1);
    const auto policy = make_policy(sc, PolicyKind::approx_online,
                                    truncation_horizon(sc.rate_times_lifetime(), kHorizonTolerance), pool);
    for (auto _ : state) benchmark::DoNotOptimize(replicate_costs(sc, policy, 400, 1, mode(state)));
}

}  // namespace

BENCHMARK(BM_ValueIteration)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ReferenceValues)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ReplicateCosts)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
