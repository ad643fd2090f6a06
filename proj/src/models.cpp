#include "hyfed/models.hpp"

#include <algorithm>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "hyfed/digest.hpp"
#include "hyfed/kernels.hpp"
#include "hyfed/prng.hpp"
#include "hyfed/tokenizer.hpp"

namespace hyfed {

std::vector<float> HashingEmbedder::embed(std::string_view text) const {
    std::vector<float> vec(dim_, 0.0f);
    const std::string joined = join_tokens(tokenize(text));
    if (joined.empty()) return vec;

    auto add_gram = [&](std::string_view gram) {
        const uint64_t x = mix64(fnv1a64(gram));
        const size_t bucket = static_cast<size_t>(x % dim_);
        const float sign = ((x >> 32) & 1ull) ? 1.0f : -1.0f;
        vec[bucket] += sign;
    };

    if (joined.size() < 3) {
        add_gram(joined);
    } else {
        for (size_t i = 0; i + 3 <= joined.size(); ++i)
            add_gram(std::string_view(joined).substr(i, 3));
    }
    kernels::normalize(vec);
    return vec;
}

double JaccardReranker::score(std::string_view query, std::string_view doc) const {
    const auto q_tokens = tokenize(query);
    const auto d_tokens = tokenize(doc);
    const std::set<std::string> q_set(q_tokens.begin(), q_tokens.end());
    const std::set<std::string> d_set(d_tokens.begin(), d_tokens.end());
    if (q_set.empty() && d_set.empty()) return 0.0;

    size_t inter = 0;
    for (const auto& t : q_set) inter += d_set.count(t);
    const size_t uni = q_set.size() + d_set.size() - inter;
    if (uni == 0) return 0.0;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

namespace {

std::string phrase_key(const std::vector<std::string>& tokens, size_t begin, size_t len) {
    std::string key;
    for (size_t i = begin; i < begin + len; ++i) {
        if (i > begin) key.push_back('\x1f');
        key += tokens[i];
    }
    return key;
}

}  // namespace

DictionaryNer::DictionaryNer(std::vector<std::string> names) {
    std::unordered_set<std::string> seen;
    for (auto& raw : names) {
        std::string norm = normalize_name(raw);
        auto tokens = tokenize(norm);
        if (tokens.empty()) continue;
        const std::string key = phrase_key(tokens, 0, tokens.size());
        if (!seen.insert(key).second) continue;  // first definition wins
        max_len_ = std::max(max_len_, tokens.size());
        phrases_.push_back(std::move(tokens));
        names_.push_back(std::move(norm));
    }
}

std::vector<std::string> DictionaryNer::extract(std::string_view text) const {
    std::vector<std::string> out;
    if (phrases_.empty()) return out;

    std::unordered_map<std::string, size_t> by_key;
    by_key.reserve(phrases_.size());
    for (size_t i = 0; i < phrases_.size(); ++i)
        by_key.emplace(phrase_key(phrases_[i], 0, phrases_[i].size()), i);

    const auto tokens = tokenize(text);
    std::unordered_set<std::string> emitted;
    size_t i = 0;
    while (i < tokens.size()) {
        size_t matched = 0;
        size_t hit = 0;
        const size_t cap = std::min(max_len_, tokens.size() - i);
        for (size_t len = cap; len >= 1; --len) {
            auto it = by_key.find(phrase_key(tokens, i, len));
            if (it != by_key.end()) {
                matched = len;
                hit = it->second;
                break;
            }
        }
        if (matched == 0) {
            ++i;
            continue;
        }
        if (emitted.insert(names_[hit]).second) out.push_back(names_[hit]);
        i += matched;
    }
    return out;
}

std::vector<std::string> dictionary_extract_entities(std::string_view text,
                                                     const std::vector<std::string>& names) {
    return DictionaryNer(names).extract(text);
}

}  // namespace hyfed
