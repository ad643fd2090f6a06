#include "hyfed/tokenizer.hpp"

#include <algorithm>
#include <cctype>

namespace hyfed {

namespace {

struct Range {
    uint32_t lo, hi;
};

// Letter/digit ranges beyond ASCII. Not exhaustive Unicode — a fixed,
// documented table covering the scripts that show up in clinical text.
constexpr Range kWordRanges[] = {
    {0x00B5, 0x00B5},  // micro sign
    {0x00C0, 0x00D6}, {0x00D8, 0x00F6}, {0x00F8, 0x024F},  // Latin-1 + Extended A/B
    {0x0386, 0x0386}, {0x0388, 0x03FF},                    // Greek
    {0x0400, 0x04FF},                                      // Cyrillic
    {0x05D0, 0x05EA},                                      // Hebrew
    {0x0620, 0x064A}, {0x0660, 0x0669},                    // Arabic letters + digits
    {0x0900, 0x097F},                                      // Devanagari
    {0x1E00, 0x1EFF},                                      // Latin Extended Additional
    {0x3041, 0x30FF},                                      // Hiragana / Katakana
    {0x4E00, 0x9FFF},                                      // CJK unified
    {0xAC00, 0xD7A3},                                      // Hangul
};

// Single-codepoint lowercase for the cased ranges above. ASCII plus the
// regular offset blocks; everything else maps to itself.
uint32_t lower_codepoint(uint32_t cp) {
    if (cp < 0x80) return static_cast<uint32_t>(std::tolower(static_cast<int>(cp)));
    if (cp >= 0x00C0 && cp <= 0x00DE && cp != 0x00D7) return cp + 0x20;  // Latin-1
    if (cp >= 0x0391 && cp <= 0x03A9 && cp != 0x03A2) return cp + 0x20;  // Greek
    if (cp >= 0x0410 && cp <= 0x042F) return cp + 0x20;                  // Cyrillic
    if (cp >= 0x0400 && cp <= 0x040F) return cp + 0x50;                  // Cyrillic supplements
    if (cp >= 0x0100 && cp <= 0x017F && (cp % 2 == 0)) return cp + 1;    // Latin Extended-A pairs
    return cp;
}

// Minimal UTF-8 decoder; invalid sequences yield 0xFFFD and advance one byte,
// which the tokenizer treats as a separator.
uint32_t decode_utf8(std::string_view s, size_t& i) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    if (b0 < 0x80) {
        ++i;
        return b0;
    }
    auto cont = [&](size_t k) {
        return i + k < s.size() && (static_cast<unsigned char>(s[i + k]) & 0xC0) == 0x80;
    };
    auto cb = [&](size_t k) { return static_cast<uint32_t>(s[i + k]) & 0x3F; };
    if ((b0 & 0xE0) == 0xC0 && cont(1)) {
        uint32_t cp = (static_cast<uint32_t>(b0 & 0x1F) << 6) | cb(1);
        i += 2;
        return cp < 0x80 ? 0xFFFD : cp;
    }
    if ((b0 & 0xF0) == 0xE0 && cont(1) && cont(2)) {
        uint32_t cp = (static_cast<uint32_t>(b0 & 0x0F) << 12) | (cb(1) << 6) | cb(2);
        i += 3;
        return cp < 0x800 ? 0xFFFD : cp;
    }
    if ((b0 & 0xF8) == 0xF0 && cont(1) && cont(2) && cont(3)) {
        uint32_t cp = (static_cast<uint32_t>(b0 & 0x07) << 18) | (cb(1) << 12) | (cb(2) << 6) | cb(3);
        i += 4;
        return (cp < 0x10000 || cp > 0x10FFFF) ? 0xFFFD : cp;
    }
    ++i;
    return 0xFFFD;
}

void encode_utf8(uint32_t cp, std::string& out) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

}  // namespace

bool is_word_codepoint(uint32_t cp) {
    if (cp < 0x80) {
        return (cp >= '0' && cp <= '9') || (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z');
    }
    for (const auto& r : kWordRanges) {
        if (cp >= r.lo && cp <= r.hi) return true;
    }
    return false;
}

std::vector<TokenSpan> tokenize_spans(std::string_view text) {
    std::vector<TokenSpan> out;
    std::string current;
    size_t tok_begin = 0;
    size_t i = 0;
    while (i < text.size()) {
        const size_t cp_begin = i;
        const uint32_t cp = decode_utf8(text, i);
        if (is_word_codepoint(cp)) {
            if (current.empty()) tok_begin = cp_begin;
            encode_utf8(lower_codepoint(cp), current);
        } else if (!current.empty()) {
            out.push_back({std::move(current), tok_begin, cp_begin});
            current.clear();
        }
    }
    if (!current.empty()) out.push_back({std::move(current), tok_begin, text.size()});
    return out;
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> out;
    for (auto& span : tokenize_spans(text)) out.push_back(std::move(span.text));
    return out;
}

std::string join_tokens(const std::vector<std::string>& tokens) {
    std::string out;
    for (size_t i = 0; i < tokens.size(); ++i) {
        if (i) out.push_back(' ');
        out += tokens[i];
    }
    return out;
}

std::string normalize_name(std::string_view name) {
    std::string out;
    out.reserve(name.size());
    bool pending_space = false;
    size_t i = 0;
    while (i < name.size()) {
        const uint32_t cp = decode_utf8(name, i);
        if (cp == ' ' || cp == '\t' || cp == '\n' || cp == '\r' || cp == '\f' || cp == '\v') {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        encode_utf8(lower_codepoint(cp), out);
    }
    return out;
}

}  // namespace hyfed
