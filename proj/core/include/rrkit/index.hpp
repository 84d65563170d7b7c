#pragma once

#include <cstddef>
#include <string>
#include <unordered_map>
#include <vector>

#include "rrkit/embedding.hpp"

namespace rrkit {

struct ScoredHit {
    std::string doc_id;
    double score = 0.0;
};

/// Exact in-memory cosine index: a full scan over all entries, no
/// approximation. Hits are ordered by descending score with ascending doc_id
/// breaking ties. Reads may run concurrently; writes need exclusive access.
class VectorIndex {
public:
    explicit VectorIndex(std::size_t dim);

    /// Rejects duplicate ids, dimension mismatches, and zero-norm or
    /// non-finite vectors (cosine would be undefined for them).
    void add(const std::string& id, const Embedding& embedding);

    /// Exact top-k by cosine similarity; returns min(k, size()) hits.
    std::vector<ScoredHit> top_k(const Embedding& query, std::size_t k) const;

    /// top_k over many queries, fanned out across up to `workers` threads.
    std::vector<std::vector<ScoredHit>> top_k_batch(const std::vector<Embedding>& queries,
                                                    std::size_t k, std::size_t workers = 1) const;

    double cosine_to(const std::string& id, const Embedding& query) const;
    bool contains(const std::string& id) const { return lookup_.count(id) > 0; }
    Embedding embedding_of(const std::string& id) const;

    std::size_t dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return ids_.size(); }
    const std::vector<std::string>& ids() const noexcept { return ids_; }

    /// Persistence reuses the embedding cache format (see cache.hpp).
    void save(const std::string& path) const;
    static VectorIndex load(const std::string& path);

private:
    std::size_t dim_;
    std::vector<std::string> ids_;
    std::vector<double> data_;  // row-major size() x dim_
    std::vector<double> norms_; // L2 norm per row
    std::unordered_map<std::string, std::size_t> lookup_;
};

} // namespace rrkit
