#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace hyfed {

struct TokenSpan {
    std::string text;  // lowercased token
    size_t begin = 0;  // byte offsets into the original string (half-open)
    size_t end = 0;
};

// Canonical tokenizer: lowercase, split on any non-alphanumeric character,
// drop empty tokens. No stemming, no stopword removal. The alphanumeric
// class is Unicode-aware (medical text carries Greek letters, micro signs
// and accented names), implemented as a codepoint range table rather than
// a locale dependency so results are identical on every platform.
std::vector<std::string> tokenize(std::string_view text);

// Same segmentation, with byte offsets of each token in the input.
std::vector<TokenSpan> tokenize_spans(std::string_view text);

// Join with single spaces.
std::string join_tokens(const std::vector<std::string>& tokens);

// lowercase + collapse internal whitespace runs + trim; identity rule for
// graph node names and entity lookups.
std::string normalize_name(std::string_view name);

// True if the codepoint counts as alphanumeric for tokenization.
bool is_word_codepoint(uint32_t cp);

}  // namespace hyfed
