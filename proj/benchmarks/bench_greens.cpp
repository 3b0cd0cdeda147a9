// Series-engine costs: diagonal fields, kernel matrices, and point queries.

#include <benchmark/benchmark.h>

#include "kdvq/greens.hpp"
#include "kdvq/random.hpp"

using namespace kdvq;

namespace {

SampledPotential bench_potential(double L, double h) {
    std::size_t n = std::size_t(2.0 * L / h) + 1;
    if (n % 2 == 0) ++n;
    return random_bump_potential(UniformGrid(-L, L, n), 0.25, 17);
}

}  // namespace

static void greens_field_full_grid(benchmark::State& state) {
    const SampledPotential pot = bench_potential(8.0, 1.0 / double(state.range(0)));
    for (auto _ : state)
        benchmark::DoNotOptimize(greens_field(pot, 1.0, 1e-8));
}
BENCHMARK(greens_field_full_grid)->Arg(32)->Arg(64)->Arg(128);

static void greens_kernel_matrix_full(benchmark::State& state) {
    const SampledPotential pot = bench_potential(8.0, 1.0 / double(state.range(0)));
    for (auto _ : state)
        benchmark::DoNotOptimize(greens_kernel_matrix(pot, 1.0, 1e-8));
}
BENCHMARK(greens_kernel_matrix_full)->Arg(32)->Arg(64);

static void neumann_point_query(benchmark::State& state) {
    const SampledPotential pot = bench_potential(40.0, 1.0 / 64.0);
    for (auto _ : state)
        benchmark::DoNotOptimize(neumann_green(pot, 1.0, 0.37, -1.21, 1e-7));
}
BENCHMARK(neumann_point_query);

