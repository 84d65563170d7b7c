#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "rrkit/tokenizer.hpp"

namespace rrkit {

struct Document {
    std::string id;
    std::string text;
};

/// A retrieval query; task_definition, when present, feeds the instruction
/// template before embedding.
struct Query {
    std::string id;
    std::string text;
    std::optional<std::string> task_definition;
};

/// Half-open token span of one chunk within its document.
struct Chunk {
    std::string doc_id;
    std::size_t chunk_index = 0;
    std::size_t token_start = 0;
    std::size_t token_end = 0;

    std::size_t length() const noexcept { return token_end - token_start; }
};

struct ChunkConfig {
    std::size_t chunk_size = 512;
    std::size_t overlap = 100;

    std::size_t stride() const noexcept { return chunk_size - overlap; }
};

/// Reads a line-delimited JSON corpus of {"id", "text"} records, preserving
/// order. Malformed lines and duplicate ids abort with the offending line.
std::vector<Document> ingest(const std::string& path);

/// Reads line-delimited {"id", "text", "task_definition"?} query records.
std::vector<Query> load_queries(const std::string& path);

/// Sliding-window spans over a token stream of length n_tokens: chunk k covers
/// [k*stride, min(k*stride + chunk_size, N)). A document at most chunk_size
/// tokens long yields exactly one chunk; an empty stream yields none.
std::vector<std::pair<std::size_t, std::size_t>> chunk_spans(std::size_t n_tokens,
                                                             const ChunkConfig& cfg);

/// chunk_spans applied to a document's tokens, labeled with its id.
std::vector<Chunk> chunk(const std::string& doc_id, const std::vector<std::string>& tokens,
                         const ChunkConfig& cfg);

/// "Instruct: {task_definition} Query: {query}", exactly.
std::string instruct_query(const std::string& task_definition, const std::string& query);

/// First min(N, max_len) tokens.
std::vector<std::string> truncate_query(const std::vector<std::string>& tokens,
                                        std::size_t max_len = 64);

} // namespace rrkit
