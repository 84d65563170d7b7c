#include "rrkit/pretrain.hpp"

#include <cmath>
#include <fstream>
#include <random>

#include <json.hpp>

#include "rrkit/errors.hpp"
#include "rrkit/random.hpp"
#include "rrkit/tokenizer.hpp"

namespace rrkit {

std::size_t TableDoc::cell_count() const {
    std::size_t m = 0;
    for (const auto& row : cells) {
        m += row.size();
    }
    return m;
}

void TableDoc::validate() const {
    if (!cells.empty()) {
        const std::size_t width = cells.front().size();
        for (const auto& row : cells) {
            if (row.size() != width) {
                throw InvalidInput("table " + id + ": ragged cell rows");
            }
        }
    }
    if (summary.empty() && !synthetic_pending) {
        throw InvalidInput("table " + id + ": empty summary without synthetic_pending flag");
    }
}

TableSequence build_table_sequence(const TableDoc& table) {
    table.validate();
    TableSequence seq;
    seq.table_tokens.reserve(table.headers.size() + table.cell_count() + 3);
    seq.table_tokens.push_back(kClsToken);
    for (const auto& h : table.headers) {
        seq.table_tokens.push_back(h);
    }
    seq.table_tokens.push_back(kSepToken);
    for (const auto& row : table.cells) {
        for (const auto& c : row) {
            seq.table_tokens.push_back(c);
        }
    }
    seq.table_tokens.push_back(kSepToken);

    seq.summary_tokens.reserve(table.summary.size() + table.metadata.size() + 1);
    seq.summary_tokens.push_back(kClsToken);
    for (const auto& s : table.summary) {
        seq.summary_tokens.push_back(s);
    }
    for (const auto& m : table.metadata) {
        seq.summary_tokens.push_back(m);
    }
    return seq;
}

SplitTable split_table_sequence(const std::vector<std::string>& table_tokens) {
    if (table_tokens.empty() || table_tokens.front() != kClsToken) {
        throw InvalidInput("split_table_sequence: sequence does not start with " +
                           std::string(kClsToken));
    }
    SplitTable out;
    std::size_t i = 1;
    for (; i < table_tokens.size() && table_tokens[i] != kSepToken; ++i) {
        out.headers.push_back(table_tokens[i]);
    }
    if (i == table_tokens.size()) {
        throw InvalidInput("split_table_sequence: missing first separator");
    }
    for (++i; i < table_tokens.size() && table_tokens[i] != kSepToken; ++i) {
        out.cells.push_back(table_tokens[i]);
    }
    if (i != table_tokens.size() - 1) {
        throw InvalidInput("split_table_sequence: malformed trailing separator");
    }
    return out;
}

MaskPlan sample_masks(std::size_t maskable_length, double ratio, std::uint64_t seed) {
    if (!(ratio > 0.0) || !(ratio < 1.0)) {
        throw InvalidConfig("sample_masks: ratio must lie in (0, 1)");
    }
    const std::size_t count =
        detail::round_half_away(ratio * static_cast<double>(maskable_length));
    std::mt19937_64 rng(seed);
    MaskPlan plan;
    plan.positions = detail::sample_without_replacement(rng, maskable_length, count);
    plan.ratio = ratio;
    plan.seed = seed;
    return plan;
}

AttentionMatrix m1_attention_mask(std::size_t length, double keep_ratio, std::uint64_t seed) {
    if (length < 2) {
        throw InvalidConfig("m1_attention_mask: length must be at least 2");
    }
    if (!(keep_ratio > 0.0) || keep_ratio > 1.0) {
        throw InvalidConfig("m1_attention_mask: keep_ratio must lie in (0, 1]");
    }
    AttentionMatrix mat;
    mat.size = length;
    mat.allow.assign(length * length, false);
    for (std::size_t col = 0; col < length; ++col) {
        mat.allow[col] = true; // row 0 attends everywhere, itself included
    }

    const std::size_t want =
        std::max<std::size_t>(1, detail::round_half_away(keep_ratio * static_cast<double>(length - 1)));
    std::mt19937_64 rng(seed);
    std::vector<std::size_t> others;
    others.reserve(length - 2);
    for (std::size_t row = 1; row < length; ++row) {
        mat.allow[row * length + 0] = true;
        // Sample the remainder from positions other than 0 and the row itself.
        others.clear();
        for (std::size_t col = 1; col < length; ++col) {
            if (col != row) others.push_back(col);
        }
        const std::size_t extra = std::min(want - 1, others.size());
        const auto picks = detail::sample_without_replacement(rng, others.size(), extra);
        for (std::size_t p : picks) {
            mat.allow[row * length + others[p]] = true;
        }
    }
    return mat;
}

double table_decoder_loss(const std::vector<std::vector<double>>& predictions, const MaskPlan& mask,
                          const std::vector<std::size_t>& true_token_ids) {
    if (predictions.size() != mask.positions.size()) {
        throw InvalidInput("table_decoder_loss: need one distribution per masked position");
    }
    double loss = 0.0;
    for (std::size_t i = 0; i < mask.positions.size(); ++i) {
        const std::size_t pos = mask.positions[i];
        if (pos >= true_token_ids.size()) {
            throw InvalidInput("table_decoder_loss: masked position beyond the token stream");
        }
        const auto& dist = predictions[i];
        double sum = 0.0;
        for (double p : dist) {
            if (p < -1e-12) {
                throw InvalidInput("table_decoder_loss: negative probability");
            }
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-6) {
            throw InvalidInput("table_decoder_loss: distribution not normalized at masked position " +
                               std::to_string(pos));
        }
        const std::size_t truth = true_token_ids[pos];
        if (truth >= dist.size()) {
            throw InvalidInput("table_decoder_loss: true token id outside the vocabulary");
        }
        loss -= std::log(dist[truth]);
    }
    return loss;
}

std::vector<TableDoc> load_table_corpus(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open table corpus: " + path);
    }
    WhitespaceTokenizer tok;
    std::vector<TableDoc> tables;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object() || !j.contains("id")) {
            throw ParseError("table corpus " + path + ": malformed record on line " +
                             std::to_string(line_no));
        }
        TableDoc t;
        t.id = j.at("id").get<std::string>();
        if (j.contains("headers")) {
            t.headers = j.at("headers").get<std::vector<std::string>>();
        }
        if (j.contains("cells")) {
            t.cells = j.at("cells").get<std::vector<std::vector<std::string>>>();
        }
        if (j.contains("summary")) {
            t.summary = tok.tokenize(j.at("summary").get<std::string>());
        }
        if (j.contains("metadata")) {
            t.metadata = tok.tokenize(j.at("metadata").get<std::string>());
        }
        t.synthetic_pending = j.value("synthetic_pending", t.summary.empty());
        try {
            t.validate();
        } catch (const Error& e) {
            throw ParseError("table corpus " + path + " line " + std::to_string(line_no) + ": " +
                             e.what());
        }
        tables.push_back(std::move(t));
    }
    return tables;
}

} // namespace rrkit
