#include "rrkit/corpus.hpp"

#include <fstream>
#include <unordered_set>

#include <json.hpp>

#include "rrkit/errors.hpp"

namespace rrkit {

namespace {

nlohmann::json parse_record(const std::string& line, const std::string& path, std::size_t line_no) {
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        throw ParseError(path + ": malformed record on line " + std::to_string(line_no));
    }
    return j;
}

} // namespace

std::vector<Document> ingest(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open corpus: " + path);
    }
    std::vector<Document> docs;
    std::unordered_set<std::string> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j = parse_record(line, path, line_no);
        if (!j.contains("id") || !j.contains("text") || !j.at("id").is_string() ||
            !j.at("text").is_string()) {
            throw ParseError(path + ": malformed record on line " + std::to_string(line_no));
        }
        Document d{j.at("id").get<std::string>(), j.at("text").get<std::string>()};
        if (d.id.empty()) {
            throw ParseError(path + ": empty id on line " + std::to_string(line_no));
        }
        if (!seen.insert(d.id).second) {
            throw InvalidInput(path + ": duplicate id \"" + d.id + "\" on line " +
                               std::to_string(line_no));
        }
        docs.push_back(std::move(d));
    }
    return docs;
}

std::vector<Query> load_queries(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open queries: " + path);
    }
    std::vector<Query> queries;
    std::unordered_set<std::string> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j = parse_record(line, path, line_no);
        if (!j.contains("id") || !j.contains("text")) {
            throw ParseError(path + ": malformed record on line " + std::to_string(line_no));
        }
        Query q;
        q.id = j.at("id").get<std::string>();
        q.text = j.at("text").get<std::string>();
        if (j.contains("task_definition")) {
            q.task_definition = j.at("task_definition").get<std::string>();
        }
        if (q.id.empty()) {
            throw ParseError(path + ": empty id on line " + std::to_string(line_no));
        }
        if (!seen.insert(q.id).second) {
            throw InvalidInput(path + ": duplicate id \"" + q.id + "\" on line " +
                               std::to_string(line_no));
        }
        queries.push_back(std::move(q));
    }
    return queries;
}

std::vector<std::pair<std::size_t, std::size_t>> chunk_spans(std::size_t n_tokens,
                                                             const ChunkConfig& cfg) {
    if (cfg.chunk_size == 0 || cfg.overlap >= cfg.chunk_size) {
        throw InvalidConfig("chunk_spans: overlap must be smaller than chunk_size");
    }
    std::vector<std::pair<std::size_t, std::size_t>> spans;
    if (n_tokens == 0) {
        return spans;
    }
    const std::size_t stride = cfg.stride();
    for (std::size_t start = 0;; start += stride) {
        const std::size_t end = std::min(start + cfg.chunk_size, n_tokens);
        spans.emplace_back(start, end);
        if (end == n_tokens) {
            break;
        }
    }
    return spans;
}

std::vector<Chunk> chunk(const std::string& doc_id, const std::vector<std::string>& tokens,
                         const ChunkConfig& cfg) {
    const auto spans = chunk_spans(tokens.size(), cfg);
    std::vector<Chunk> chunks;
    chunks.reserve(spans.size());
    for (std::size_t k = 0; k < spans.size(); ++k) {
        chunks.push_back(Chunk{doc_id, k, spans[k].first, spans[k].second});
    }
    return chunks;
}

std::string instruct_query(const std::string& task_definition, const std::string& query) {
    return "Instruct: " + task_definition + " Query: " + query;
}

std::vector<std::string> truncate_query(const std::vector<std::string>& tokens,
                                        std::size_t max_len) {
    if (max_len < 1) {
        throw InvalidConfig("truncate_query: max_len must be at least 1");
    }
    if (tokens.size() <= max_len) {
        return tokens;
    }
    return std::vector<std::string>(tokens.begin(),
                                    tokens.begin() + static_cast<std::ptrdiff_t>(max_len));
}

} // namespace rrkit
