#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace rrkit {

inline constexpr const char* kClsToken = "[CLS]";
inline constexpr const char* kSepToken = "[SEP]";

/// A table paired with its natural-language summary, all tokenized. Cells are
/// stored as rows of equal width; metadata tokens, when present, are appended
/// to the summary stream. A table with an empty summary must be flagged
/// synthetic_pending until one is generated for it.
struct TableDoc {
    std::string id;
    std::vector<std::string> headers;
    std::vector<std::vector<std::string>> cells; // m rows by n columns
    std::vector<std::string> summary;
    std::vector<std::string> metadata;
    bool synthetic_pending = false;

    std::size_t cell_count() const;
    void validate() const; // ragged rows or missing summary flag -> invalid-input
};

/// Deterministic mask selection: offsets into the maskable region, sorted.
struct MaskPlan {
    std::vector<std::size_t> positions;
    double ratio = 0.0;
    std::uint64_t seed = 0;
};

/// Row-attends-to-column boolean matrix.
struct AttentionMatrix {
    std::size_t size = 0;
    std::vector<bool> allow; // row-major size x size

    bool at(std::size_t row, std::size_t col) const { return allow[row * size + col]; }
};

/// T = [CLS] h_1..h_J [SEP] c_1..c_M [SEP] with cells flattened row-major;
/// S = [CLS] s_1..s_K followed by any metadata tokens.
struct TableSequence {
    std::vector<std::string> table_tokens;
    std::vector<std::string> summary_tokens;
};

TableSequence build_table_sequence(const TableDoc& table);

/// Inverse of the table side of build_table_sequence: recovers headers and the
/// flattened cell stream by splitting on the separator tokens.
struct SplitTable {
    std::vector<std::string> headers;
    std::vector<std::string> cells;
};
SplitTable split_table_sequence(const std::vector<std::string>& table_tokens);

/// Chooses round(ratio * maskable_length) positions uniformly without
/// replacement, rounding half away from zero. Deterministic for a fixed seed.
/// Positions are offsets into the maskable region, so marker slots are never
/// eligible.
MaskPlan sample_masks(std::size_t maskable_length, double ratio, std::uint64_t seed);

/// Restricted attention for the enhanced-decoding stage. Row 0 attends
/// everywhere. Every other row attends to a seeded-random subset of the other
/// positions of size round(keep_ratio * (length - 1)) (at least one), always
/// including position 0 and never itself.
AttentionMatrix m1_attention_mask(std::size_t length, double keep_ratio, std::uint64_t seed);

/// Sum over masked summary positions of the cross-entropy of the true token
/// under the predicted distribution. `predictions` holds one probability
/// distribution per masked position, in ascending position order;
/// `true_token_ids` are vocabulary ids for the full summary stream.
double table_decoder_loss(const std::vector<std::vector<double>>& predictions, const MaskPlan& mask,
                          const std::vector<std::size_t>& true_token_ids);

/// Line-delimited JSON table corpus: {"id", "headers": [..], "cells": [[..]..],
/// "summary": "..", "metadata"?: "..", "synthetic_pending"?: bool} with summary
/// and metadata whitespace-tokenized on load.
std::vector<TableDoc> load_table_corpus(const std::string& path);

} // namespace rrkit
