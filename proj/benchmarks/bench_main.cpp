#include <benchmark/benchmark.h>

#include "superconc/covering.hpp"
#include "superconc/extremes.hpp"
#include "superconc/rng.hpp"
#include "superconc/sampler.hpp"

using namespace superconc;

static void BM_PhiloxNormals(benchmark::State& state) {
    NormalStream s(1, 0);
    std::vector<double> buf(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        s.fill_normal(buf);
        benchmark::DoNotOptimize(buf.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_PhiloxNormals)->Arg(1 << 16);

static void generate_paths(benchmark::State& state, SampleMethod method) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const PathGenerator gen(CovarianceModel::ornstein_uhlenbeck(), GridGeometry::sequence(n), method, 1);
    std::vector<double> path(n);
    std::uint64_t stream = 0;
    for (auto _ : state) {
        gen.generate(stream++, path);
        benchmark::DoNotOptimize(path.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

static void BM_PathCholesky(benchmark::State& state) { generate_paths(state, SampleMethod::cholesky); }
static void BM_PathCirculant(benchmark::State& state) { generate_paths(state, SampleMethod::circulant); }
BENCHMARK(BM_PathCholesky)->RangeMultiplier(4)->Range(64, 2048);
BENCHMARK(BM_PathCirculant)->RangeMultiplier(4)->Range(64, 65536);

static void BM_VerifyCovering(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto model = CovarianceModel::ornstein_uhlenbeck();
    const auto gram = gram_matrix(model, n);
    const auto cov = build_sequence_covering(n, 0.5);
    const double r0 = evaluate(model, double(block_half_width(n, 0.5)));
    for (auto _ : state) benchmark::DoNotOptimize(verify_covering(cov, gram, r0));
}
BENCHMARK(BM_VerifyCovering)->Arg(256)->Arg(1024);

static void BM_SimulateExtremes(benchmark::State& state) {
    const PathGenerator gen(CovarianceModel::iid(), GridGeometry::sequence(4096), SampleMethod::automatic, 1);
    for (auto _ : state) benchmark::DoNotOptimize(simulate_extremes(gen, 256));
}
BENCHMARK(BM_SimulateExtremes);
BENCHMARK_MAIN();
