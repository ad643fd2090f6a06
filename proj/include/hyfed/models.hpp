#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace hyfed {

// Pluggable model contracts. Reference implementations are deterministic
// and dependency-free; HTTP-backed ones live in model_service.hpp and can
// be swapped in via config without touching any retrieval code.

class Embedder {
public:
    virtual ~Embedder() = default;
    virtual size_t dim() const = 0;
    virtual std::vector<float> embed(std::string_view text) const = 0;
};

class Reranker {
public:
    virtual ~Reranker() = default;
    // Normalized relevance in [0,1].
    virtual double score(std::string_view query, std::string_view doc) const = 0;
};

class Ner {
public:
    virtual ~Ner() = default;
    virtual std::vector<std::string> extract(std::string_view text) const = 0;
};

class Summarizer {
public:
    virtual ~Summarizer() = default;
    virtual std::string draft(std::string_view view_text, std::string_view query_text) const = 0;
};

// Signed feature hashing over character 3-grams of the tokenized,
// space-joined text; Euclidean-normalized. Empty text embeds to the zero
// vector. Deterministic across platforms.
class HashingEmbedder : public Embedder {
public:
    explicit HashingEmbedder(size_t dim = 256) : dim_(dim) {}
    size_t dim() const override { return dim_; }
    std::vector<float> embed(std::string_view text) const override;

private:
    size_t dim_;
};

// Jaccard similarity of token sets; 0 when both are empty.
class JaccardReranker : public Reranker {
public:
    double score(std::string_view query, std::string_view doc) const override;
};

// Longest-match dictionary NER: case-insensitive, word-boundary anchored,
// duplicates removed preserving first occurrence. Matches return the
// normalized dictionary form.
class DictionaryNer : public Ner {
public:
    explicit DictionaryNer(std::vector<std::string> names);
    std::vector<std::string> extract(std::string_view text) const override;

private:
    std::vector<std::vector<std::string>> phrases_;  // tokenized, longest first
    std::vector<std::string> names_;                 // parallel to phrases_
    size_t max_len_ = 0;
};

// One-shot longest-match extraction (used by DictionaryNer and the
// association-graph builder).
std::vector<std::string> dictionary_extract_entities(std::string_view text,
                                                     const std::vector<std::string>& names);

// The backend bundle every client carries.
struct ModelSet {
    std::shared_ptr<Embedder> embedder;
    std::shared_ptr<Reranker> reranker;
    std::shared_ptr<Ner> ner;                // may be null: backends build their own dictionary
    std::shared_ptr<Summarizer> summarizer;  // may be null: extractive reference path
};

}  // namespace hyfed
