#include <benchmark/benchmark.h>

#include <random>

#include "rrkit/index.hpp"
#include "rrkit/random.hpp"

namespace {

rrkit::Embedding random_embedding(std::mt19937_64& rng, std::size_t dim) {
    rrkit::Embedding e;
    e.values.resize(dim);
    for (auto& x : e.values) {
        x = rrkit::detail::uniform_real(rng, -1.0, 1.0);
    }
    return e;
}

void BM_TopK(benchmark::State& state) {
    const auto n_docs = static_cast<std::size_t>(state.range(0));
    const std::size_t dim = 256;
    std::mt19937_64 rng(42);
    rrkit::VectorIndex index(dim);
    for (std::size_t d = 0; d < n_docs; ++d) {
        index.add("doc" + std::to_string(d), random_embedding(rng, dim));
    }
    const auto query = random_embedding(rng, dim);
    for (auto _ : state) {
        benchmark::DoNotOptimize(index.top_k(query, 20));
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                            static_cast<std::int64_t>(n_docs));
}
BENCHMARK(BM_TopK)->Arg(1000)->Arg(10000)->Arg(50000);

void BM_TopKBatchWorkers(benchmark::State& state) {
    const std::size_t dim = 128;
    std::mt19937_64 rng(43);
    rrkit::VectorIndex index(dim);
    for (std::size_t d = 0; d < 20000; ++d) {
        index.add("doc" + std::to_string(d), random_embedding(rng, dim));
    }
    std::vector<rrkit::Embedding> queries;
    for (int q = 0; q < 32; ++q) {
        queries.push_back(random_embedding(rng, dim));
    }
    const auto workers = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(index.top_k_batch(queries, 20, workers));
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * 32);
}
BENCHMARK(BM_TopKBatchWorkers)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->UseRealTime();

} // namespace

BENCHMARK_MAIN();
