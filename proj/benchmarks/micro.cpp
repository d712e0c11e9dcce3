#include <benchmark/benchmark.h>

#include <vector>

#include "nphmm/density_estimation.hpp"
#include "nphmm/harness.hpp"
#include "nphmm/model.hpp"
#include "nphmm/moments.hpp"
#include "nphmm/separation.hpp"
#include "nphmm/simulate.hpp"
#include "nphmm/wavelet.hpp"

namespace {

using namespace nphmm;

ModelParams reference_model(int level) {
    ModelParams theta;
    theta.p = 0.2;
    theta.q = 0.3;
    theta.f0 = uniform_density(level);
    theta.f1 = step_density(level, 0.5);
    return theta;
}

void bm_sample_path(benchmark::State& state) {
    const ModelParams theta = reference_model(10);
    const auto n = static_cast<std::size_t>(state.range(0));
    std::uint64_t stream = 0;
    for (auto _ : state)
        benchmark::DoNotOptimize(sample_path(theta, n, 7, stream++));
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                            static_cast<std::int64_t>(n));
}
BENCHMARK(bm_sample_path)->Arg(1 << 12)->Arg(1 << 16);

void bm_moment_triple(benchmark::State& state) {
    const ModelParams theta = reference_model(10);
    const ReparamPoint rp = reparametrize(theta);
    const SamplePath path = sample_path(theta, static_cast<std::size_t>(state.range(0)), 7);
    for (auto _ : state)
        benchmark::DoNotOptimize(moment_triple(path, rp.contrast));
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * state.range(0));
}
BENCHMARK(bm_moment_triple)->Arg(1 << 12)->Arg(1 << 16);

void bm_analyze(benchmark::State& state) {
    const DensityGrid f = step_density(10, 0.5);
    for (auto _ : state)
        benchmark::DoNotOptimize(analyze(f, 9));
}
BENCHMARK(bm_analyze);

void bm_synthesize(benchmark::State& state) {
    const CoeffTree tree = analyze(step_density(10, 0.5), 9);
    for (auto _ : state)
        benchmark::DoNotOptimize(synthesize(tree, 10));
}
BENCHMARK(bm_synthesize);

void bm_empirical_gram(benchmark::State& state) {
    const ModelParams theta = reference_model(10);
    const SamplePath path = sample_path(theta, 1 << 14, 7);
    const auto M = static_cast<int>(state.range(0));
    for (auto _ : state)
        benchmark::DoNotOptimize(empirical_gram(path, M));
}
BENCHMARK(bm_empirical_gram)->Arg(3)->Arg(5);

void bm_jacobi(benchmark::State& state) {
    const ModelParams theta = reference_model(10);
    const GramMatrix gram = empirical_gram(sample_path(theta, 1 << 14, 7), 5);
    for (auto _ : state)
        benchmark::DoNotOptimize(leading_eigenvector(gram));
}
BENCHMARK(bm_jacobi);

void bm_smooth_estimate(benchmark::State& state) {
    const ModelParams theta = reference_model(10);
    const ReparamPoint rp = reparametrize(theta);
    const SamplePath path = sample_path(theta, static_cast<std::size_t>(state.range(0)), 7);
    for (auto _ : state)
        benchmark::DoNotOptimize(smooth_estimate(path, rp.contrast, 2.4, 1.0, 1.5));
}
BENCHMARK(bm_smooth_estimate)->Arg(1 << 12)->Arg(1 << 16);

}  // namespace

BENCHMARK_MAIN();
