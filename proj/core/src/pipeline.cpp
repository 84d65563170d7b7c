#include "rrkit/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <unordered_set>

#include <json.hpp>

#include "rrkit/corpus.hpp"
#include "rrkit/errors.hpp"

namespace rrkit {

double OverlapReranker::score(const std::vector<std::string>& query_tokens,
                              const std::vector<std::string>& doc_tokens) const {
    const std::unordered_set<std::string> qset(query_tokens.begin(), query_tokens.end());
    std::unordered_set<std::string> counted;
    for (const auto& t : doc_tokens) {
        if (qset.count(t)) {
            counted.insert(t);
        }
    }
    return static_cast<double>(counted.size());
}

const std::vector<std::string>& MapTokenStore::tokens(const std::string& doc_id) const {
    const auto it = tokens_.find(doc_id);
    if (it == tokens_.end()) {
        throw InvalidInput("token store: unknown doc id \"" + doc_id + "\"");
    }
    return it->second;
}

namespace {

void sort_by_score_then_id(std::vector<ScoredHit>& hits) {
    std::sort(hits.begin(), hits.end(), [](const ScoredHit& a, const ScoredHit& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.doc_id < b.doc_id;
    });
}

} // namespace

std::vector<ScoredHit> retrieve_rerank(const Embedding& query_embedding,
                                       const std::vector<std::string>& query_tokens,
                                       const VectorIndex& index, const Reranker& reranker,
                                       const DocTokenStore& docs, const RerankConfig& cfg) {
    if (cfg.retrieve_k == 0) {
        throw InvalidConfig("retrieve_rerank: retrieve_k must be at least 1");
    }
    const auto truncated = truncate_query(query_tokens, cfg.max_query_tokens);
    auto candidates = index.top_k(query_embedding, cfg.retrieve_k);
    for (auto& hit : candidates) {
        hit.score = reranker.score(truncated, docs.tokens(hit.doc_id));
    }
    sort_by_score_then_id(candidates);
    return candidates;
}

std::vector<std::string> mine_hard_negatives(const Embedding& query_embedding,
                                             const std::vector<std::string>& query_tokens,
                                             const std::string& positive_id,
                                             const VectorIndex& index, const Reranker& reranker,
                                             const DocTokenStore& docs, const MiningConfig& cfg) {
    if (!(cfg.margin > 0.0) || cfg.margin > 1.0) {
        throw InvalidConfig("mine_hard_negatives: margin must lie in (0, 1]");
    }
    if (cfg.keep_n > cfg.retrieve_k || cfg.retrieve_k == 0) {
        throw InvalidConfig("mine_hard_negatives: need 1 <= keep_n <= retrieve_k");
    }
    if (!index.contains(positive_id)) {
        throw InvalidInput("mine_hard_negatives: positive id \"" + positive_id +
                           "\" is not in the index");
    }

    const double positive_sim = index.cosine_to(positive_id, query_embedding);
    const double threshold = cfg.margin * positive_sim;

    std::vector<ScoredHit> survivors;
    for (const auto& hit : index.top_k(query_embedding, cfg.retrieve_k)) {
        if (hit.doc_id == positive_id) continue;
        const bool above = hit.score > threshold;
        if (cfg.exclude_above_margin ? above : !above) continue;
        survivors.push_back(hit);
    }

    const auto truncated = truncate_query(query_tokens, cfg.max_query_tokens);
    for (auto& hit : survivors) {
        hit.score = reranker.score(truncated, docs.tokens(hit.doc_id));
    }
    sort_by_score_then_id(survivors);
    if (survivors.size() > cfg.keep_n) {
        survivors.resize(cfg.keep_n);
    }

    std::vector<std::string> negatives;
    negatives.reserve(survivors.size());
    for (const auto& hit : survivors) {
        negatives.push_back(hit.doc_id);
    }
    return negatives;
}

void write_mined_negatives(const std::string& path, const std::vector<MinedNegatives>& records) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw IoError("write_mined_negatives: cannot open " + path);
    }
    for (const auto& rec : records) {
        nlohmann::json j;
        j["query_id"] = rec.query_id;
        j["positive_id"] = rec.positive_id;
        j["negatives"] = rec.negatives;
        out << j.dump() << '\n';
    }
}

std::vector<MinedNegatives> read_mined_negatives(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("read_mined_negatives: cannot open " + path);
    }
    std::vector<MinedNegatives> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object() || !j.contains("query_id") ||
            !j.contains("positive_id") || !j.contains("negatives")) {
            throw ParseError(path + ": malformed record on line " + std::to_string(line_no));
        }
        MinedNegatives rec;
        rec.query_id = j.at("query_id").get<std::string>();
        rec.positive_id = j.at("positive_id").get<std::string>();
        rec.negatives = j.at("negatives").get<std::vector<std::string>>();
        records.push_back(std::move(rec));
    }
    return records;
}

} // namespace rrkit
