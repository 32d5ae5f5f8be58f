#include <benchmark/benchmark.h>

#include "gps/datasets.hpp"
#include "gps/estimation.hpp"
#include "gps/moments.hpp"

namespace {

const gps::GpsParams kGG{0.5, 2.0, 0.9, gps::PowerSeriesFamily::geometric(), false};

void BM_Pdf(benchmark::State& state) {
    double x = 0.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(gps::pdf(kGG, 0.5 + 1e-9 * x));
        x += 1.0;
    }
}
BENCHMARK(BM_Pdf);

void BM_Quantile(benchmark::State& state) {
    double q = 0.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(gps::quantile(kGG, 0.3 + 1e-10 * q));
        q += 1.0;
    }
}
BENCHMARK(BM_Quantile);

void BM_Sample(benchmark::State& state) {
    for (auto _ : state)
        benchmark::DoNotOptimize(gps::sample(kGG, state.range(0), 42));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Sample)->Arg(1000)->Arg(10000);

void BM_ScoreAndInformation(benchmark::State& state) {
    const gps::ObservedSample data{gps::sample(kGG, state.range(0), 7)};
    for (auto _ : state) {
        benchmark::DoNotOptimize(gps::score(kGG, data));
        benchmark::DoNotOptimize(gps::observed_information(kGG, data));
    }
}
BENCHMARK(BM_ScoreAndInformation)->Arg(63)->Arg(1000);

void BM_FitGlassFibreGG(benchmark::State& state) {
    const gps::ObservedSample data{gps::glass_fibre_strengths()};
    for (auto _ : state)
        benchmark::DoNotOptimize(
            gps::mle_direct(gps::PowerSeriesFamily::geometric(), data));
}
BENCHMARK(BM_FitGlassFibreGG);

void BM_EmFit(benchmark::State& state) {
    const gps::ObservedSample data{gps::sample(kGG, state.range(0), 11)};
    for (auto _ : state)
        benchmark::DoNotOptimize(gps::em_fit(gps::PowerSeriesFamily::geometric(), data));
}
BENCHMARK(BM_EmFit)->Arg(100);

void BM_Moment(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(gps::moment(kGG, 1));
}
BENCHMARK(BM_Moment);

}  // namespace

BENCHMARK_MAIN();
