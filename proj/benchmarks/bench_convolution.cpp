// Sparse pairwise convolution cost at the truncations used by the solver runs.

#include <benchmark/benchmark.h>

#include "kdvq/kdv.hpp"
#include "kdvq/random.hpp"
#include "kdvq/waves.hpp"

using namespace kdvq;

namespace {

CoefficientField dense_random_field(int N, std::uint64_t seed) {
    Rng rng(seed);
    CoefficientField field(N);
    for (int i = 0; i <= N; ++i)
        for (int j = (i == 0 ? 1 : -N); j <= N; ++j)
            field.set({i, j}, Complex(rng.uniform(-1, 1), rng.uniform(-1, 1)));
    return field;
}

}  // namespace

static void nonlinear_term_axes_sparse(benchmark::State& state) {
    const FrequencyBasis basis = FrequencyBasis::standard();
    const int N = int(state.range(0));
    const CoefficientField field = square_wave_both_components(basis, N);
    for (auto _ : state)
        benchmark::DoNotOptimize(nonlinear_term(field, basis, N));
}
BENCHMARK(nonlinear_term_axes_sparse)->Arg(16)->Arg(32)->Arg(64);

static void nonlinear_term_dense(benchmark::State& state) {
    const FrequencyBasis basis = FrequencyBasis::standard();
    const int N = int(state.range(0));
    const CoefficientField field = dense_random_field(N, 5);
    for (auto _ : state)
        benchmark::DoNotOptimize(nonlinear_term(field, basis, N));
}
BENCHMARK(nonlinear_term_dense)->Arg(8)->Arg(16)->Arg(32);

static void solver_step_square_wave(benchmark::State& state) {
    const FrequencyBasis basis = FrequencyBasis::standard();
    SolverConfig config;
    config.N = int(state.range(0));
    config.dt = 1e-4;
    const CoefficientField data = square_wave_both_components(basis, config.N);
    for (auto _ : state)
        benchmark::DoNotOptimize(step(data, 0.0, config, basis));
}
BENCHMARK(solver_step_square_wave)->Arg(16)->Arg(32);

BENCHMARK_MAIN();
