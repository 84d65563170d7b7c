#include "rrkit/tokenizer.hpp"

#include <cctype>

#include "rrkit/errors.hpp"

namespace rrkit {

std::vector<std::string> WhitespaceTokenizer::tokenize(std::string_view text) const {
    if (max_piece_bytes_ == 0) {
        throw InvalidConfig("WhitespaceTokenizer: max_piece_bytes must be positive");
    }
    std::vector<std::string> tokens;
    std::size_t i = 0;
    const std::size_t n = text.size();
    while (i < n) {
        while (i < n && std::isspace(static_cast<unsigned char>(text[i]))) {
            ++i;
        }
        std::size_t start = i;
        while (i < n && !std::isspace(static_cast<unsigned char>(text[i]))) {
            ++i;
        }
        for (std::size_t p = start; p < i; p += max_piece_bytes_) {
            tokens.emplace_back(text.substr(p, std::min(max_piece_bytes_, i - p)));
        }
    }
    return tokens;
}

std::unique_ptr<Tokenizer> make_tokenizer(const std::string& name) {
    if (name == "whitespace") {
        return std::make_unique<WhitespaceTokenizer>();
    }
    throw InvalidConfig("unknown tokenizer: " + name);
}

} // namespace rrkit
