#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace rrkit {

/// Chunk spans and token budgets are tokenizer-dependent, so the tokenizer is
/// pluggable. Implementations must be deterministic and thread-safe.
class Tokenizer {
public:
    virtual ~Tokenizer() = default;
    virtual std::vector<std::string> tokenize(std::string_view text) const = 0;
};

/// Splits on ASCII whitespace. Unbroken runs longer than max_piece_bytes fall
/// back to fixed-size byte pieces so pathological inputs still produce a
/// bounded token stream.
class WhitespaceTokenizer final : public Tokenizer {
public:
    explicit WhitespaceTokenizer(std::size_t max_piece_bytes = 32)
        : max_piece_bytes_(max_piece_bytes) {}

    std::vector<std::string> tokenize(std::string_view text) const override;

private:
    std::size_t max_piece_bytes_;
};

/// Factory for the tokenizers shipped with the toolkit ("whitespace").
std::unique_ptr<Tokenizer> make_tokenizer(const std::string& name);

} // namespace rrkit
