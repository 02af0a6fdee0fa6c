// Parallel replica loop against the serial reference on the same workloads.

#include <benchmark/benchmark.h>

#include "spde/noise.hpp"
#include "spde/parallel.hpp"
#include "spde/solvers.hpp"

using namespace spde;

namespace {

const SpaceTimeGrid& heat_grid() {
    static const SpaceTimeGrid g(TimeGrid(1.0, 256), 8.0, 127);
    return g;
}

const solvers::HeatWeights& heat_weights() {
    static const solvers::HeatWeights w(heat_grid(), solvers::KernelRule::midpoint);
    return w;
}

double point_value(std::size_t r) {
    return solvers::linear_heat_at(heat_weights(), 256, 63, RngStream(1, 0).child(r));
}

double gbm_end(std::size_t r) {
    static const TimeGrid g(1.0, 64);
    return solvers::geometric_bm(sample_bm_path(g, RngStream(2, 0).child(r))).values.back();
}

void BM_heat_parallel(benchmark::State& state) {
    heat_weights();
    const auto n = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(parallel::map_replicas<double>(n, point_value));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_heat_serial(benchmark::State& state) {
    heat_weights();
    const auto n = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(serial::map_replicas<double>(n, point_value));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_gbm_parallel(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(parallel::map_replicas<double>(n, gbm_end));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_gbm_serial(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(serial::map_replicas<double>(n, gbm_end));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

} // namespace

BENCHMARK(BM_heat_parallel)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_heat_serial)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_gbm_parallel)->Arg(4096)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_gbm_serial)->Arg(4096)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
