#include "nbgraph/construction.hpp"
#include "nbgraph/graph_stats.hpp"
#include "nbgraph/spectral.hpp"
#include "nbgraph/synthetic.hpp"

#include <benchmark/benchmark.h>

using namespace nbgraph;

namespace {

VectorDataset corpus(std::size_t n) {
    BlobSpec spec;
    spec.blobs = 5;
    spec.points = n;
    spec.dim = 64;
    spec.separation = 6.0;
    spec.seed = 11;
    return make_blobs(spec);
}

void BM_KnnStandard(benchmark::State& state) {
    const VectorDataset data = corpus(static_cast<std::size_t>(state.range(0)));
    const DistanceEvaluator dist(data, Metric::cosine);
    for (auto _ : state) {
        benchmark::DoNotOptimize(build_knn_standard(dist, 5));
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_KnnStandard)->RangeMultiplier(2)->Range(512, 4096)->Unit(benchmark::kMillisecond)->Complexity();

void BM_KnnIncremental(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const VectorDataset data = corpus(n);
    const DistanceEvaluator dist(data, Metric::cosine);
    const Ordering ordering = Ordering::random(n, 3);
    for (auto _ : state) {
        benchmark::DoNotOptimize(build_knn_incremental(dist, 5, ordering));
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_KnnIncremental)->RangeMultiplier(2)->Range(512, 4096)->Unit(benchmark::kMillisecond)->Complexity();

// Uncached distances: the regime above the evaluator's table limit.
void BM_KnnIncrementalUncached(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const VectorDataset data = corpus(n);
    const DistanceEvaluator dist(data, Metric::cosine, 0);
    const Ordering ordering = Ordering::random(n, 3);
    for (auto _ : state) {
        benchmark::DoNotOptimize(build_knn_incremental(dist, 5, ordering));
    }
}
BENCHMARK(BM_KnnIncrementalUncached)->Arg(2048)->Arg(8192)->Unit(benchmark::kMillisecond);

void BM_Epsilon0(benchmark::State& state) {
    const VectorDataset data = corpus(static_cast<std::size_t>(state.range(0)));
    const DistanceEvaluator dist(data, Metric::cosine);
    for (auto _ : state) {
        benchmark::DoNotOptimize(find_epsilon0(dist));
    }
}
BENCHMARK(BM_Epsilon0)->Arg(1024)->Arg(2048)->Unit(benchmark::kMillisecond);

void BM_Eigenmaps(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const VectorDataset data = corpus(n);
    const NeighborGraph g = build_knn_incremental(data, 5, Metric::cosine, Ordering::random(n, 1));
    const AffinityMatrix a = affinity_connection(g);
    for (auto _ : state) {
        benchmark::DoNotOptimize(laplacian_eigenmaps(a, 5));
    }
}
BENCHMARK(BM_Eigenmaps)->Arg(256)->Arg(2048)->Arg(8192)->Unit(benchmark::kMillisecond);

void BM_StatsSampled(benchmark::State& state) {
    const VectorDataset data = corpus(8192);
    const NeighborGraph g = build_knn_incremental(data, 5, Metric::cosine, Ordering::random(8192, 1));
    StatsOptions opts;
    opts.node_threshold = 0;
    std::uint64_t seed = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(estimate_stats_mc(g, data.labels()->ids, seed++, opts));
    }
}
BENCHMARK(BM_StatsSampled)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
