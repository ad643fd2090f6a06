#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "hyfed/corpus.hpp"
#include "hyfed/hit.hpp"
#include "hyfed/models.hpp"

namespace hyfed {

// Sparse term-weight vector, entries sorted by term id.
struct SparseVector {
    std::vector<std::pair<uint32_t, float>> entries;

    double dot(const SparseVector& other) const;
    double norm() const;
    void normalize();
};

struct TextParams {
    double alpha = 0.8;  // hybrid weight on the lexical cosine
    size_t pool = 50;    // per-pool candidate count before fusion
    size_t k = 10;
};

// Lexical (tf-idf) + dense index over one corpus. Term ids are assigned in
// sorted term order so rebuilds are bit-identical.
class TextIndex {
public:
    TextIndex() = default;
    TextIndex(const Corpus& corpus, const Embedder& embedder);

    size_t size() const { return uids_.size(); }
    const std::vector<std::string>& uids() const { return uids_; }
    const std::string& doc_text(size_t i) const { return texts_[i]; }
    const std::string& doc_body(size_t i) const { return bodies_[i]; }
    const std::vector<float>& doc_embedding(size_t i) const { return embeddings_[i]; }
    const SparseVector& doc_vector(size_t i) const { return doc_vectors_[i]; }

    // ln((1+N)/(1+df)) + 1; terms absent from the corpus get df = 0.
    double idf(std::string_view term) const;

    // Normalized tf-idf vector for arbitrary text (used for both docs and
    // queries; query terms unseen in the corpus are dropped).
    SparseVector tfidf_vector(std::string_view text) const;

    // Cosine between normalized tf-idf vectors of query text and doc i.
    double cos_tfidf(const SparseVector& query_vec, size_t i) const;

    // Cosine between a query embedding and doc i's embedding.
    double dense_similarity(const std::vector<float>& query_embedding, size_t i) const;

private:
    std::vector<std::string> uids_;
    std::vector<std::string> texts_;   // title + " " + body
    std::vector<std::string> bodies_;
    std::map<std::string, uint32_t> term_ids_;
    std::vector<uint32_t> dfs_;              // by term id
    std::vector<SparseVector> doc_vectors_;  // normalized tf-idf
    std::vector<std::vector<float>> embeddings_;
    double n_docs_ = 0.0;
};

// alpha*cos + (1-alpha)*reranker; alpha outside [0,1] is an error.
double hybrid_score(double cos_tfidf, double reranker, double alpha);

// Hybrid pipeline: the top-`pool` docs by cos_tfidf and by dense cosine are
// unioned, every candidate is scored with hybrid_score, and the top k are
// returned (score desc, uid asc on ties).
ScoredCandidates retrieve_text(const TextIndex& index, const Query& query,
                               const TextParams& params, const Embedder& embedder,
                               const Reranker& reranker);

}  // namespace hyfed
