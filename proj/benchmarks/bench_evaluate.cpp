// Oscillatory-sum evaluation over sample grids, the talbot pipeline's cost.

#include <benchmark/benchmark.h>

#include "kdvq/waves.hpp"

using namespace kdvq;

static void evaluate_square_wave_field(benchmark::State& state) {
    const FrequencyBasis basis = FrequencyBasis::standard();
    const CoefficientField field = square_wave_coefficients(basis, 1, int(state.range(0)));
    const SpatialSampling sampling = SpatialSampling::uniform(2048, -3.2, 3.2);
    for (auto _ : state)
        benchmark::DoNotOptimize(evaluate_field(field, basis, sampling, 1));
}
BENCHMARK(evaluate_square_wave_field)->Arg(501)->Arg(2001)->Arg(4001);

static void evaluate_two_workers(benchmark::State& state) {
    const FrequencyBasis basis = FrequencyBasis::standard();
    const CoefficientField field = square_wave_both_components(basis, 2001);
    const SpatialSampling sampling = SpatialSampling::uniform(4096, -3.2, 3.2);
    for (auto _ : state)
        benchmark::DoNotOptimize(evaluate_field(field, basis, sampling, 2));
}
BENCHMARK(evaluate_two_workers);

