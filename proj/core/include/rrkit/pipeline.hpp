#pragma once

#include <cstddef>
#include <string>
#include <unordered_map>
#include <vector>

#include "rrkit/embedding.hpp"
#include "rrkit/index.hpp"

namespace rrkit {

/// Pluggable second-stage scorer. Must be deterministic for fixed inputs and
/// tolerate concurrent calls; higher scores mean more relevant.
class Reranker {
public:
    virtual ~Reranker() = default;
    virtual double score(const std::vector<std::string>& query_tokens,
                         const std::vector<std::string>& doc_tokens) const = 0;
};

/// Counts distinct tokens shared between the (already truncated) query and the
/// document. The deterministic test reranker; real cross-encoders plug in via
/// the Reranker interface.
class OverlapReranker final : public Reranker {
public:
    double score(const std::vector<std::string>& query_tokens,
                 const std::vector<std::string>& doc_tokens) const override;
};

/// Token lookup for reranker scoring.
class DocTokenStore {
public:
    virtual ~DocTokenStore() = default;
    virtual const std::vector<std::string>& tokens(const std::string& doc_id) const = 0;
};

class MapTokenStore final : public DocTokenStore {
public:
    explicit MapTokenStore(std::unordered_map<std::string, std::vector<std::string>> tokens)
        : tokens_(std::move(tokens)) {}

    const std::vector<std::string>& tokens(const std::string& doc_id) const override;

private:
    std::unordered_map<std::string, std::vector<std::string>> tokens_;
};

struct RerankConfig {
    std::size_t retrieve_k = 20;
    std::size_t max_query_tokens = 64;
};

/// Two-stage retrieval: top retrieve_k candidates by the index, all rescored
/// with the reranker (query truncated to max_query_tokens first), returned by
/// descending reranker score with doc_id breaking ties.
std::vector<ScoredHit> retrieve_rerank(const Embedding& query_embedding,
                                       const std::vector<std::string>& query_tokens,
                                       const VectorIndex& index, const Reranker& reranker,
                                       const DocTokenStore& docs, const RerankConfig& cfg = {});

struct MiningConfig {
    double margin = 0.95;
    std::size_t retrieve_k = 20;
    std::size_t keep_n = 8;
    std::size_t max_query_tokens = 64;
    /// true: candidates with cosine above margin * positive-similarity are
    /// dropped as probable false negatives (the default sense).
    /// false: the threshold flips and only candidates at or above it survive.
    bool exclude_above_margin = true;
};

/// Hard-negative mining: retrieve top retrieve_k, drop the positive, apply the
/// margin filter against the positive's cosine, rerank the survivors, and keep
/// the top keep_n by reranker score.
std::vector<std::string> mine_hard_negatives(const Embedding& query_embedding,
                                             const std::vector<std::string>& query_tokens,
                                             const std::string& positive_id,
                                             const VectorIndex& index, const Reranker& reranker,
                                             const DocTokenStore& docs,
                                             const MiningConfig& cfg = {});

struct MinedNegatives {
    std::string query_id;
    std::string positive_id;
    std::vector<std::string> negatives;
};

/// Line-delimited JSON: {"query_id", "positive_id", "negatives": [...]}.
void write_mined_negatives(const std::string& path, const std::vector<MinedNegatives>& records);
std::vector<MinedNegatives> read_mined_negatives(const std::string& path);

} // namespace rrkit
