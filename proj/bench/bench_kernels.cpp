// Serial vs OpenMP kernel timings.
#include "kgdial/kernels.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace kgdial;

namespace {

UndirectedGraph random_graph(std::size_t n, std::size_t avg_degree, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<UndirectedGraph::Edge> edges;
    for (std::size_t k = 0; k < n * avg_degree / 2; ++k) {
        const auto u = static_cast<std::uint32_t>(rng() % n);
        const auto v = static_cast<std::uint32_t>(rng() % n);
        if (u != v)
            edges.push_back({std::min(u, v), std::max(u, v), 1.0});
    }
    return UndirectedGraph(n, edges);
}

std::vector<kernels::Tokens> random_tokens(std::size_t pairs, std::size_t len, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<kernels::Tokens> out(pairs);
    for (auto& t : out)
        for (std::size_t k = 0; k < len; ++k)
            t.push_back("w" + std::to_string(rng() % 200));
    return out;
}

template <bool Parallel>
void BM_AggregateMean(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto graph = random_graph(n, 10, 1);
    const auto in = initial_features(n, 64, 2);
    EmbeddingTable out(n, 64);
    for (auto _ : state) {
        if constexpr (Parallel)
            kernels::aggregate_mean_omp(graph, in, out);
        else
            kernels::aggregate_mean_serial(graph, in, out);
        benchmark::DoNotOptimize(out.row(0).data());
    }
}

template <bool Parallel>
void BM_EdgeCosines(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto graph = random_graph(n, 10, 3);
    const auto table = initial_features(n, 64, 4);
    std::vector<double> out(graph.edges().size());
    for (auto _ : state) {
        if constexpr (Parallel)
            kernels::edge_cosines_omp(table, graph.edges(), out);
        else
            kernels::edge_cosines_serial(table, graph.edges(), out);
        benchmark::DoNotOptimize(out.data());
    }
}

template <bool Parallel>
void BM_BestCosine(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto pool = initial_features(n, 256, 5);
    const auto query = initial_features(1, 256, 6);
    for (auto _ : state) {
        const auto m = Parallel ? kernels::best_cosine_omp(query.row(0), pool)
                                : kernels::best_cosine_serial(query.row(0), pool);
        benchmark::DoNotOptimize(m);
    }
}

template <bool Parallel>
void BM_JaccardPairs(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    std::mt19937_64 rng(7);
    std::vector<kernels::TripleSet> sets(n);
    for (auto& s : sets) {
        for (int k = 0; k < 12; ++k)
            s.push_back(Triple{EntityId{static_cast<std::uint32_t>(rng() % 500)}, RelationId{0},
                               EntityId{static_cast<std::uint32_t>(rng() % 500)}});
        std::sort(s.begin(), s.end());
        s.erase(std::unique(s.begin(), s.end()), s.end());
    }
    std::vector<kernels::IndexPair> pairs;
    for (std::uint32_t i = 0; i < n; ++i)
        for (std::uint32_t j = i + 1; j < n && j < i + 64; ++j)
            pairs.emplace_back(i, j);
    std::vector<double> out(pairs.size());
    for (auto _ : state) {
        if constexpr (Parallel)
            kernels::jaccard_pairs_omp(sets, pairs, out);
        else
            kernels::jaccard_pairs_serial(sets, pairs, out);
        benchmark::DoNotOptimize(out.data());
    }
}

template <bool Parallel>
void BM_NgramCounts(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto cand = random_tokens(n, 20, 8);
    const auto ref = random_tokens(n, 20, 9);
    std::vector<kernels::NgramCounts> out(n);
    for (auto _ : state) {
        if constexpr (Parallel)
            kernels::ngram_counts_omp(cand, ref, out);
        else
            kernels::ngram_counts_serial(cand, ref, out);
        benchmark::DoNotOptimize(out.data());
    }
}

template <bool Parallel>
void BM_LcsF1(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto cand = random_tokens(n, 30, 10);
    const auto ref = random_tokens(n, 30, 11);
    std::vector<double> out(n);
    for (auto _ : state) {
        if constexpr (Parallel)
            kernels::lcs_f1_omp(cand, ref, out);
        else
            kernels::lcs_f1_serial(cand, ref, out);
        benchmark::DoNotOptimize(out.data());
    }
}

} // namespace

BENCHMARK(BM_AggregateMean<false>)->Name("aggregate_mean/serial")->Arg(20000);
BENCHMARK(BM_AggregateMean<true>)->Name("aggregate_mean/omp")->Arg(20000)->UseRealTime();
BENCHMARK(BM_EdgeCosines<false>)->Name("edge_cosines/serial")->Arg(20000);
BENCHMARK(BM_EdgeCosines<true>)->Name("edge_cosines/omp")->Arg(20000)->UseRealTime();
BENCHMARK(BM_BestCosine<false>)->Name("best_cosine/serial")->Arg(50000);
BENCHMARK(BM_BestCosine<true>)->Name("best_cosine/omp")->Arg(50000)->UseRealTime();
BENCHMARK(BM_JaccardPairs<false>)->Name("jaccard_pairs/serial")->Arg(5000);
BENCHMARK(BM_JaccardPairs<true>)->Name("jaccard_pairs/omp")->Arg(5000)->UseRealTime();
BENCHMARK(BM_NgramCounts<false>)->Name("ngram_counts/serial")->Arg(5000);
BENCHMARK(BM_NgramCounts<true>)->Name("ngram_counts/omp")->Arg(5000)->UseRealTime();
BENCHMARK(BM_LcsF1<false>)->Name("lcs_f1/serial")->Arg(5000);
BENCHMARK(BM_LcsF1<true>)->Name("lcs_f1/omp")->Arg(5000)->UseRealTime();

BENCHMARK_MAIN();
