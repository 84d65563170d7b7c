#include "rrkit/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "rrkit/errors.hpp"

namespace rrkit {

namespace {

std::vector<std::string> split_ws(const std::string& line) {
    std::vector<std::string> fields;
    std::istringstream iss(line);
    std::string f;
    while (iss >> f) {
        fields.push_back(std::move(f));
    }
    return fields;
}

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

double gain(int grade) {
    return std::exp2(static_cast<double>(grade)) - 1.0;
}

double discount(std::size_t rank_1based) {
    return std::log2(static_cast<double>(rank_1based) + 1.0);
}

} // namespace

void Qrels::add(const std::string& query_id, const std::string& doc_id, int grade) {
    if (grade < 0) {
        throw InvalidInput("qrels: negative grade for (" + query_id + ", " + doc_id + ")");
    }
    judged_[query_id][doc_id] = grade;
}

int Qrels::grade(const std::string& query_id, const std::string& doc_id) const {
    const auto q = judged_.find(query_id);
    if (q == judged_.end()) return 0;
    const auto d = q->second.find(doc_id);
    return d == q->second.end() ? 0 : d->second;
}

bool Qrels::has_query(const std::string& query_id) const {
    return judged_.count(query_id) > 0;
}

int Qrels::total_relevance(const std::string& query_id) const {
    const auto q = judged_.find(query_id);
    if (q == judged_.end()) return 0;
    int total = 0;
    for (const auto& [doc, g] : q->second) {
        total += g;
    }
    return total;
}

Qrels Qrels::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("qrels: cannot open " + path);
    }
    Qrels qrels;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto fields = split_ws(line);
        if (fields.size() != 4) {
            throw ParseError(path + ": expected 4 fields on line " + std::to_string(line_no));
        }
        int grade = 0;
        const auto [p, ec] =
            std::from_chars(fields[3].data(), fields[3].data() + fields[3].size(), grade);
        if (ec != std::errc() || p != fields[3].data() + fields[3].size()) {
            throw ParseError(path + ": bad grade on line " + std::to_string(line_no));
        }
        try {
            qrels.add(fields[0], fields[2], grade);
        } catch (const Error& e) {
            throw ParseError(path + " line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return qrels;
}

void Qrels::to_file(const std::string& path) const {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw IoError("qrels: cannot open " + path);
    }
    for (const auto& [qid, docs] : judged_) {
        for (const auto& [doc, g] : docs) {
            out << qid << " 0 " << doc << ' ' << g << '\n';
        }
    }
}

void RunFile::set_ranking(const std::string& query_id, std::vector<RunEntry> ranking) {
    std::unordered_set<std::string> seen;
    for (std::size_t i = 0; i < ranking.size(); ++i) {
        if (!seen.insert(ranking[i].doc_id).second) {
            throw InvalidInput("run: duplicate doc \"" + ranking[i].doc_id + "\" for query " +
                               query_id);
        }
        if (i > 0 && ranking[i].score > ranking[i - 1].score) {
            throw InvalidInput("run: scores increase at rank " + std::to_string(i + 1) +
                               " for query " + query_id);
        }
    }
    rankings_[query_id] = std::move(ranking);
}

const std::vector<RunEntry>& RunFile::ranking(const std::string& query_id) const {
    const auto it = rankings_.find(query_id);
    if (it == rankings_.end()) {
        throw InvalidInput("run: no ranking for query \"" + query_id + "\"");
    }
    return it->second;
}

RunFile RunFile::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("run: cannot open " + path);
    }
    std::map<std::string, std::vector<std::pair<long, RunEntry>>> raw;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto fields = split_ws(line);
        if (fields.size() != 5) {
            throw ParseError(path + ": expected 5 fields on line " + std::to_string(line_no));
        }
        long rank = 0;
        auto [p1, ec1] = std::from_chars(fields[2].data(), fields[2].data() + fields[2].size(), rank);
        if (ec1 != std::errc() || rank < 1) {
            throw ParseError(path + ": bad rank on line " + std::to_string(line_no));
        }
        double score = 0.0;
        auto [p2, ec2] =
            std::from_chars(fields[3].data(), fields[3].data() + fields[3].size(), score);
        if (ec2 != std::errc()) {
            throw ParseError(path + ": bad score on line " + std::to_string(line_no));
        }
        raw[fields[0]].emplace_back(rank, RunEntry{fields[1], score});
    }

    RunFile run;
    for (auto& [qid, entries] : raw) {
        std::sort(entries.begin(), entries.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        std::vector<RunEntry> ranking;
        ranking.reserve(entries.size());
        for (std::size_t i = 0; i < entries.size(); ++i) {
            if (entries[i].first != static_cast<long>(i + 1)) {
                throw ParseError(path + ": ranks for query " + qid +
                                 " are not consecutive from 1");
            }
            ranking.push_back(std::move(entries[i].second));
        }
        run.set_ranking(qid, std::move(ranking));
    }
    return run;
}

void RunFile::to_file(const std::string& path, const std::string& tag) const {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw IoError("run: cannot open " + path);
    }
    for (const auto& [qid, ranking] : rankings_) {
        for (std::size_t i = 0; i < ranking.size(); ++i) {
            out << qid << ' ' << ranking[i].doc_id << ' ' << (i + 1) << ' '
                << format_double(ranking[i].score) << ' ' << tag << '\n';
        }
    }
}

double ndcg_of_ranking(const std::vector<int>& ranked_grades, const std::vector<int>& all_grades,
                       std::size_t k) {
    double dcg = 0.0;
    for (std::size_t r = 0; r < std::min(k, ranked_grades.size()); ++r) {
        dcg += gain(ranked_grades[r]) / discount(r + 1);
    }
    std::vector<int> ideal = all_grades;
    std::sort(ideal.begin(), ideal.end(), std::greater<int>());
    double idcg = 0.0;
    for (std::size_t r = 0; r < std::min(k, ideal.size()); ++r) {
        idcg += gain(ideal[r]) / discount(r + 1);
    }
    if (idcg == 0.0) {
        throw InvalidInput("ndcg_of_ranking: no relevant documents");
    }
    return dcg / idcg;
}

namespace {

template <typename PerQuery>
MetricResult average_over_judged(const RunFile& run, const Qrels& qrels, PerQuery&& per_query) {
    MetricResult res;
    double sum = 0.0;
    for (const auto& [qid, ranking] : run.by_query()) {
        if (!qrels.has_query(qid) || qrels.total_relevance(qid) == 0) {
            ++res.skipped;
            continue;
        }
        sum += per_query(qid, ranking);
        ++res.evaluated;
    }
    res.value = res.evaluated == 0 ? 0.0 : sum / static_cast<double>(res.evaluated);
    return res;
}

} // namespace

MetricResult ndcg_at_k(const RunFile& run, const Qrels& qrels, std::size_t k) {
    return average_over_judged(run, qrels, [&](const std::string& qid, const auto& ranking) {
        std::vector<int> ranked_grades;
        ranked_grades.reserve(ranking.size());
        for (const auto& e : ranking) {
            ranked_grades.push_back(qrels.grade(qid, e.doc_id));
        }
        std::vector<int> all_grades;
        for (const auto& [doc, g] : qrels.by_query().at(qid)) {
            all_grades.push_back(g);
        }
        return ndcg_of_ranking(ranked_grades, all_grades, k);
    });
}

MetricResult recall_at_k(const RunFile& run, const Qrels& qrels, std::size_t k) {
    return average_over_judged(run, qrels, [&](const std::string& qid, const auto& ranking) {
        std::size_t relevant = 0;
        for (const auto& [doc, g] : qrels.by_query().at(qid)) {
            if (g > 0) ++relevant;
        }
        std::size_t hit = 0;
        for (std::size_t r = 0; r < std::min(k, ranking.size()); ++r) {
            if (qrels.grade(qid, ranking[r].doc_id) > 0) ++hit;
        }
        return static_cast<double>(hit) / static_cast<double>(relevant);
    });
}

MetricResult match_at_k(const RunFile& run, const Qrels& qrels, std::size_t k) {
    return average_over_judged(run, qrels, [&](const std::string& qid, const auto& ranking) {
        for (std::size_t r = 0; r < std::min(k, ranking.size()); ++r) {
            if (qrels.grade(qid, ranking[r].doc_id) > 0) return 1.0;
        }
        return 0.0;
    });
}

MetricResult accuracy_at_1(const RunFile& run, const Qrels& qrels) {
    return match_at_k(run, qrels, 1);
}

} // namespace rrkit
