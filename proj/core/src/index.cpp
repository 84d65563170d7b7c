#include "rrkit/index.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "rrkit/cache.hpp"
#include "rrkit/errors.hpp"

namespace rrkit {

VectorIndex::VectorIndex(std::size_t dim) : dim_(dim) {
    if (dim == 0) {
        throw InvalidConfig("VectorIndex: dim must be positive");
    }
}

void VectorIndex::add(const std::string& id, const Embedding& embedding) {
    if (embedding.dim() != dim_) {
        throw InvalidInput("VectorIndex::add: dimension mismatch for id \"" + id + "\"");
    }
    if (lookup_.count(id)) {
        throw InvalidInput("VectorIndex::add: duplicate id \"" + id + "\"");
    }
    double norm_sq = 0.0;
    for (double x : embedding.values) {
        if (!std::isfinite(x)) {
            throw InvalidInput("VectorIndex::add: non-finite value for id \"" + id + "\"");
        }
        norm_sq += x * x;
    }
    if (norm_sq == 0.0) {
        throw InvalidInput("VectorIndex::add: zero-norm vector for id \"" + id + "\"");
    }
    lookup_.emplace(id, ids_.size());
    ids_.push_back(id);
    data_.insert(data_.end(), embedding.values.begin(), embedding.values.end());
    norms_.push_back(std::sqrt(norm_sq));
}

std::vector<ScoredHit> VectorIndex::top_k(const Embedding& query, std::size_t k) const {
    if (k == 0) {
        throw InvalidInput("VectorIndex::top_k: k must be at least 1");
    }
    if (query.dim() != dim_) {
        throw InvalidInput("VectorIndex::top_k: query dimension mismatch");
    }
    if (ids_.empty()) {
        return {};
    }
    const double qn = query.norm();
    if (qn == 0.0) {
        throw InvalidInput("VectorIndex::top_k: zero-norm query");
    }

    std::vector<std::pair<double, std::size_t>> scored(ids_.size());
    for (std::size_t row = 0; row < ids_.size(); ++row) {
        const double* base = data_.data() + row * dim_;
        double dp = 0.0;
        for (std::size_t d = 0; d < dim_; ++d) {
            dp += base[d] * query.values[d];
        }
        scored[row] = {dp / (norms_[row] * qn), row};
    }

    const std::size_t take = std::min(k, scored.size());
    auto better = [this](const std::pair<double, std::size_t>& a,
                         const std::pair<double, std::size_t>& b) {
        if (a.first != b.first) return a.first > b.first;
        return ids_[a.second] < ids_[b.second];
    };
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(take),
                      scored.end(), better);

    std::vector<ScoredHit> hits;
    hits.reserve(take);
    for (std::size_t i = 0; i < take; ++i) {
        hits.push_back({ids_[scored[i].second], scored[i].first});
    }
    return hits;
}

std::vector<std::vector<ScoredHit>> VectorIndex::top_k_batch(const std::vector<Embedding>& queries,
                                                             std::size_t k,
                                                             std::size_t workers) const {
    std::vector<std::vector<ScoredHit>> results(queries.size());
    const std::size_t n_workers = std::max<std::size_t>(1, std::min(workers, queries.size()));
    if (n_workers <= 1) {
        for (std::size_t i = 0; i < queries.size(); ++i) {
            results[i] = top_k(queries[i], k);
        }
        return results;
    }
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (std::size_t w = 0; w < n_workers; ++w) {
        pool.emplace_back([&, w]() {
            for (std::size_t i = w; i < queries.size(); i += n_workers) {
                results[i] = top_k(queries[i], k);
            }
        });
    }
    for (auto& t : pool) {
        t.join();
    }
    return results;
}

double VectorIndex::cosine_to(const std::string& id, const Embedding& query) const {
    const auto it = lookup_.find(id);
    if (it == lookup_.end()) {
        throw InvalidInput("VectorIndex::cosine_to: unknown id \"" + id + "\"");
    }
    if (query.dim() != dim_) {
        throw InvalidInput("VectorIndex::cosine_to: query dimension mismatch");
    }
    const double qn = query.norm();
    if (qn == 0.0) {
        throw InvalidInput("VectorIndex::cosine_to: zero-norm query");
    }
    const double* base = data_.data() + it->second * dim_;
    double dp = 0.0;
    for (std::size_t d = 0; d < dim_; ++d) {
        dp += base[d] * query.values[d];
    }
    return dp / (norms_[it->second] * qn);
}

Embedding VectorIndex::embedding_of(const std::string& id) const {
    const auto it = lookup_.find(id);
    if (it == lookup_.end()) {
        throw InvalidInput("VectorIndex::embedding_of: unknown id \"" + id + "\"");
    }
    Embedding e;
    const double* base = data_.data() + it->second * dim_;
    e.values.assign(base, base + dim_);
    return e;
}

void VectorIndex::save(const std::string& path) const {
    std::vector<Embedding> embs;
    embs.reserve(ids_.size());
    for (std::size_t row = 0; row < ids_.size(); ++row) {
        Embedding e;
        const double* base = data_.data() + row * dim_;
        e.values.assign(base, base + dim_);
        embs.push_back(std::move(e));
    }
    cache_write(path, ids_, embs, dim_);
}

VectorIndex VectorIndex::load(const std::string& path) {
    CacheData data = cache_read(path);
    if (data.dim == 0) {
        throw IntegrityError("VectorIndex::load: " + path + " declares dimension 0");
    }
    VectorIndex index(data.dim);
    for (std::size_t i = 0; i < data.ids.size(); ++i) {
        index.add(data.ids[i], data.embeddings[i]);
    }
    return index;
}

} // namespace rrkit
