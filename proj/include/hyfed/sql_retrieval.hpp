#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "hyfed/corpus.hpp"
#include "hyfed/hit.hpp"
#include "hyfed/models.hpp"

namespace hyfed {

struct FusionWeights {
    double lambda1 = 0.4;  // exact match
    double lambda2 = 0.2;  // boolean signal, clamped at /3.0
    double lambda3 = 0.2;  // natural-language signal, clamped at 1
    double lambda4 = 0.2;  // phrase similarity
};

struct SqlParams {
    FusionWeights weights;
    double bool_divisor = 3.0;
    double bm25_k1 = 1.2;
    double bm25_b = 0.75;
    size_t n_per_entity = 20;
    size_t k = 10;
};

// In-memory emulation of a full-text-indexed relational table. A record's
// row holds title, body, then its structured fields, in that order; empty
// values are omitted. The uid is the row key and is not searchable.
class RelationalStore {
public:
    RelationalStore() = default;
    explicit RelationalStore(const Corpus& corpus);

    size_t size() const { return uids_.size(); }
    const std::vector<std::string>& uids() const { return uids_; }
    bool has(const std::string& uid) const;

    // Concatenated searchable column values, space-joined in column order.
    const std::string& row_text(const std::string& uid) const;

    // "column: value; " per column, newline-joined (summary view).
    std::string render_view(const std::string& uid) const;

    double idf(const std::string& term) const;
    double avg_len() const { return avg_len_; }

    // Rows whose text shares at least one token with the entity, ascending uid.
    std::vector<std::string> candidate_rows(const std::string& entity) const;

    // Sum of idf over the entity's distinct tokens present in the row.
    double boolean_score(const std::string& entity, const std::string& uid) const;

    // BM25 over the row text with the entity's tokens as the query.
    double natural_language_score(const std::string& entity, const std::string& uid,
                                  const SqlParams& params = {}) const;

    // 1 iff the entity's token sequence occurs contiguously in the row's tokens.
    int exact_match(const std::string& entity, const std::string& uid) const;

    // Cosine of entity and row-text embeddings, clamped to [0,1].
    double phrase_similarity(const std::string& entity, const std::string& uid,
                             const Embedder& embedder) const;

private:
    size_t index_of(const std::string& uid) const;  // throws on unknown uid

    std::vector<std::string> uids_;
    std::vector<std::vector<std::pair<std::string, std::string>>> columns_;
    std::vector<std::string> texts_;
    std::vector<std::vector<std::string>> tokens_;
    std::vector<std::map<std::string, uint32_t>> tfs_;
    std::map<std::string, std::vector<std::pair<size_t, uint32_t>>> postings_;
    std::vector<double> lens_;
    double avg_len_ = 0.0;
    std::map<std::string, size_t> by_uid_;
};

double combined_score(int exact, double s_bool, double s_nl, double s_sim,
                      const FusionWeights& w, double bool_divisor = 3.0);

// Per-entity fusion scoring, uid-level merge keeping max s_combined, then a
// final rerank pass: sort (s_rerank desc, s_combined desc, uid asc), top-k.
// With no extractable entities the whole query string acts as one entity.
ScoredCandidates retrieve_sql(const RelationalStore& store, const Query& query, const Ner& ner,
                              const Embedder& embedder, const Reranker& reranker,
                              const SqlParams& params);

}  // namespace hyfed
