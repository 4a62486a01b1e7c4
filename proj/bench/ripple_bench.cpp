// Parallel kernels against their serial references.
#include <benchmark/benchmark.h>
#include <omp.h>

#include <map>

#include "ripple/simlab.hpp"
#include "ripple/vindex.hpp"

using namespace ripple;

namespace {

const VectorIndex& index_of(std::size_t n) {
    static std::map<std::size_t, VectorIndex> cache;
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, build_index(sim::make_random_corpus(n, 1), EmbedderConfig{})).first;
    return it->second;
}

void BM_QuerySerial(benchmark::State& state) {
    const auto& ix = index_of(static_cast<std::size_t>(state.range(0)));
    auto q = ix.stored_vector(ix.title(0));
    for (auto _ : state) benchmark::DoNotOptimize(query_serial(ix, q, 1000));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_QueryParallel(benchmark::State& state) {
    const auto& ix = index_of(static_cast<std::size_t>(state.range(0)));
    auto q = ix.stored_vector(ix.title(0));
    for (auto _ : state) benchmark::DoNotOptimize(query(ix, q, 1000));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_BuildIndex(benchmark::State& state) {
    auto corpus = sim::make_random_corpus(5000, 2);
    const int saved = omp_get_max_threads();
    omp_set_num_threads(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(build_index(corpus, EmbedderConfig{}));
    omp_set_num_threads(saved);
    state.SetItemsProcessed(state.iterations() * 5000);
}

}  // namespace

BENCHMARK(BM_QuerySerial)->Arg(10000)->Arg(50000)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_QueryParallel)->Arg(10000)->Arg(50000)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_BuildIndex)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
