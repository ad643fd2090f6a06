#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hyfed/corpus.hpp"
#include "hyfed/models.hpp"

namespace hyfed {

struct PiiSpan {
    size_t start = 0;  // byte offsets, half-open
    size_t end = 0;
    std::string category;  // PERSON|DATE|PHONE|EMAIL|ID|AGE_OVER_89|LOCATION
    std::string source;    // recognizer name
};

struct MaskedText {
    std::string text;
    // placeholder -> original surface, insertion order; client-side only,
    // never serialized onto the wire.
    std::vector<std::pair<std::string, std::string>> mapping;
};

struct Summary {
    std::string patient_uid_hash;
    std::string text;
    Modality source_modality = Modality::Text;
    double score = 0.0;
};

struct PrivacyConfig {
    std::vector<std::string> recognizers = {"PERSON", "DATE",  "PHONE",
                                            "EMAIL",  "ID",    "AGE_OVER_89"};
    std::vector<std::string> person_lexicon;  // loaded names, one surface each
    double theta = 0.35;
    size_t max_summary_tokens = 120;
    std::string client_key;

    bool recognizer_enabled(std::string_view name) const;
};

// One term per line, UTF-8; '#' comments and blank lines skipped.
std::vector<std::string> load_lexicon(const std::string& path);

// Rule-based recognizers; overlaps resolved longest-span-wins, then
// earliest start. Result sorted by start, non-overlapping.
std::vector<PiiSpan> detect_pii(std::string_view text, const PrivacyConfig& cfg);

// Replace spans with <CATEGORY_n> placeholders, numbering per category in
// first-appearance order; identical surfaces of one category share a
// placeholder. Spans must be sorted and non-overlapping.
MaskedText mask(std::string_view text, const std::vector<PiiSpan>& spans);

// Sentence-level relevance filter: keep sentences containing any token of
// `query_entities` or with embedding cosine >= theta against the query;
// if nothing survives, the single highest-cosine sentence is kept.
std::string erase_irrelevant(std::string_view text, const Query& query, double theta,
                             const Embedder& embedder,
                             const std::vector<std::string>& query_entities);

// Sentence + offset view used by erase_irrelevant; exposed for tests.
std::vector<std::string> split_sentences(std::string_view text);

struct SealedVector {
    uint32_t dim = 0;
    std::vector<int64_t> payload;
    std::vector<uint8_t> tag;  // truncated keyed MAC over payload
};

// Fixed-point quantization (scale 2^16), keyed coordinate permutation and
// keyed additive stream, integrity-tagged. unseal inverts exactly at the
// quantized precision and rejects a wrong key.
SealedVector seal_features(const std::vector<float>& v, std::string_view key);
std::vector<float> unseal(const SealedVector& sealed, std::string_view key);

struct SummarizeInput {
    std::string uid;
    std::string view;  // modality-rendered text (body, column lines, statement)
    double score = 0.0;
};

// Reference path: erase -> token truncation -> detect+mask to a fixpoint
// (record uids are masked as ID category) -> keyed uid hash. A service
// drafter may replace the erase step; its output is masked all the same.
std::vector<Summary> summarize(const std::vector<SummarizeInput>& records, const Query& query,
                               Modality modality, const PrivacyConfig& cfg,
                               const Embedder& embedder,
                               const std::vector<std::string>& query_entities,
                               const std::vector<std::string>& known_uids,
                               const Summarizer* drafter = nullptr);

}  // namespace hyfed
