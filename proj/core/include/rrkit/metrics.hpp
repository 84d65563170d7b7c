#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

namespace rrkit {

/// Graded relevance judgments: (query_id, doc_id) -> nonnegative grade.
class Qrels {
public:
    void add(const std::string& query_id, const std::string& doc_id, int grade);
    int grade(const std::string& query_id, const std::string& doc_id) const;
    bool has_query(const std::string& query_id) const;
    int total_relevance(const std::string& query_id) const;

    const std::map<std::string, std::map<std::string, int>>& by_query() const { return judged_; }

    /// Whitespace-separated "query_id iteration doc_id grade" lines.
    static Qrels from_file(const std::string& path);
    void to_file(const std::string& path) const;

private:
    std::map<std::string, std::map<std::string, int>> judged_;
};

struct RunEntry {
    std::string doc_id;
    double score = 0.0;
};

/// Ranked retrieval output per query. Rankings keep descending-score order;
/// per-query doc ids are unique and scores non-increasing.
class RunFile {
public:
    void set_ranking(const std::string& query_id, std::vector<RunEntry> ranking);
    const std::vector<RunEntry>& ranking(const std::string& query_id) const;
    const std::map<std::string, std::vector<RunEntry>>& by_query() const { return rankings_; }

    /// Whitespace-separated "query_id doc_id rank score tag" lines, ranks
    /// consecutive from 1. Scores are printed in shortest round-trip form, so
    /// write/read is lossless.
    static RunFile from_file(const std::string& path);
    void to_file(const std::string& path, const std::string& tag = "rrkit") const;

private:
    std::map<std::string, std::vector<RunEntry>> rankings_;
};

/// value averages over evaluated queries; queries without a positive judgment
/// are excluded from the mean and surface in `skipped`.
struct MetricResult {
    double value = 0.0;
    std::size_t evaluated = 0;
    std::size_t skipped = 0;
};

/// Graded NDCG@k with gain 2^rel - 1 and log2(r+1) discount; the ideal ranking
/// comes from the query's full judgment set.
MetricResult ndcg_at_k(const RunFile& run, const Qrels& qrels, std::size_t k = 10);

/// |relevant in top-k| / |relevant|, averaged over queries with >= 1 relevant.
MetricResult recall_at_k(const RunFile& run, const Qrels& qrels, std::size_t k = 5);

/// Fraction of queries with at least one relevant doc in the top k.
MetricResult match_at_k(const RunFile& run, const Qrels& qrels, std::size_t k = 5);

/// Fraction of queries whose rank-1 doc is relevant (match_at_k with k = 1).
MetricResult accuracy_at_1(const RunFile& run, const Qrels& qrels);

/// NDCG of a single ranked grade sequence against an ideal built from
/// `all_grades`; the building block the per-query metric averages.
double ndcg_of_ranking(const std::vector<int>& ranked_grades, const std::vector<int>& all_grades,
                       std::size_t k);

} // namespace rrkit
