#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "rrkit/corpus.hpp"
#include "rrkit/embedder.hpp"

namespace rrkit {

struct ThroughputConfig {
    ChunkConfig chunking{};
    std::size_t batch_size = 128;
    std::size_t repeats = 3;
};

struct RepeatTiming {
    double wall_seconds = 0.0;
    bool ok = true;
    std::string error;
};

/// Ingestion throughput over a corpus. Counting is exact and deterministic;
/// only wall time varies between repeats. The timing window spans
/// tokenization, chunking, and embedding end to end.
struct ThroughputReport {
    std::size_t total_docs = 0;
    std::size_t total_chunks = 0;
    std::vector<RepeatTiming> repeats;
    double docs_per_second = 0.0; // total_docs / median successful wall time
    std::map<std::size_t, std::size_t> chunk_length_histogram;
    std::size_t chunk_size = 0;
    std::size_t overlap = 0;
    std::size_t batch_size = 0;
    bool includes_tokenization = true;
};

ThroughputReport measure_throughput(const std::vector<Document>& corpus, const BatchEmbedFn& embed,
                                    const ThroughputConfig& cfg = {});

/// Lossless JSON round-trip for reports.
std::string report_to_json(const ThroughputReport& report);
ThroughputReport report_from_json(const std::string& json_text);

/// Speed of `other` relative to `reference`: other/reference - 1.
double relative_speed(double other_docs_per_second, double reference_docs_per_second);

/// The relative speed as a percent with one decimal, e.g. 115 vs 144 -> "-20.1%".
std::string format_relative_speed(double other_docs_per_second, double reference_docs_per_second);

/// Character-length profile for synthetic corpora: log-normal lengths rescaled
/// to hit mean_chars, clamped to [min_chars, max_chars].
struct LengthDistribution {
    double mean_chars = 6393.0;
    std::size_t min_chars = 10;
    std::size_t max_chars = 475001;
    double log_sigma = 1.4;
};

/// Deterministic synthetic corpus of random-word documents whose empirical
/// mean length tracks the target.
std::vector<Document> synth_corpus(std::size_t n_docs, const LengthDistribution& lengths,
                                   std::uint64_t seed);

} // namespace rrkit
