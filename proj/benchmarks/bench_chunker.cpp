#include <benchmark/benchmark.h>

#include "rrkit/corpus.hpp"
#include "rrkit/throughput.hpp"
#include "rrkit/tokenizer.hpp"

namespace {

void BM_ChunkSpans(benchmark::State& state) {
    const auto n_tokens = static_cast<std::size_t>(state.range(0));
    rrkit::ChunkConfig cfg;
    for (auto _ : state) {
        benchmark::DoNotOptimize(rrkit::chunk_spans(n_tokens, cfg));
    }
}
BENCHMARK(BM_ChunkSpans)->Arg(512)->Arg(8192)->Arg(131072);

void BM_TokenizeAndChunk(benchmark::State& state) {
    rrkit::LengthDistribution lengths;
    lengths.mean_chars = static_cast<double>(state.range(0));
    const auto corpus = rrkit::synth_corpus(16, lengths, 123);
    rrkit::WhitespaceTokenizer tok;
    rrkit::ChunkConfig cfg;
    std::size_t chunks = 0;
    for (auto _ : state) {
        for (const auto& doc : corpus) {
            chunks += rrkit::chunk_spans(tok.tokenize(doc.text).size(), cfg).size();
        }
        benchmark::DoNotOptimize(chunks);
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * 16);
}
BENCHMARK(BM_TokenizeAndChunk)->Arg(2000)->Arg(20000);

} // namespace
