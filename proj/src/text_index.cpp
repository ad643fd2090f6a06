#include "hyfed/text_index.hpp"

#include <algorithm>
#include <cmath>

#include "hyfed/common.hpp"
#include "hyfed/kernels.hpp"
#include "hyfed/tokenizer.hpp"

namespace hyfed {

double SparseVector::dot(const SparseVector& other) const {
    double sum = 0.0;
    auto a = entries.begin();
    auto b = other.entries.begin();
    while (a != entries.end() && b != other.entries.end()) {
        if (a->first < b->first) {
            ++a;
        } else if (b->first < a->first) {
            ++b;
        } else {
            sum += static_cast<double>(a->second) * static_cast<double>(b->second);
            ++a;
            ++b;
        }
    }
    return sum;
}

double SparseVector::norm() const {
    double sum = 0.0;
    for (const auto& [id, w] : entries) sum += static_cast<double>(w) * static_cast<double>(w);
    return std::sqrt(sum);
}

void SparseVector::normalize() {
    const double n = norm();
    if (n == 0.0) return;
    for (auto& [id, w] : entries) w = static_cast<float>(w / n);
}

TextIndex::TextIndex(const Corpus& corpus, const Embedder& embedder) {
    n_docs_ = static_cast<double>(corpus.records.size());
    for (const auto& [term, df] : std::map<std::string, uint32_t>(corpus.vocabulary.begin(),
                                                                  corpus.vocabulary.end())) {
        term_ids_.emplace(term, static_cast<uint32_t>(dfs_.size()));
        dfs_.push_back(df);
    }

    for (const auto& rec : corpus.records) {
        std::string text = rec.title;
        if (!text.empty() && !rec.body.empty()) text += " ";
        text += rec.body;

        uids_.push_back(rec.uid);
        doc_vectors_.push_back(tfidf_vector(text));
        embeddings_.push_back(embedder.embed(text));
        bodies_.push_back(rec.body);
        texts_.push_back(std::move(text));
    }
}

double TextIndex::idf(std::string_view term) const {
    auto it = term_ids_.find(std::string(term));
    const double df = it == term_ids_.end() ? 0.0 : static_cast<double>(dfs_[it->second]);
    return std::log((1.0 + n_docs_) / (1.0 + df)) + 1.0;
}

SparseVector TextIndex::tfidf_vector(std::string_view text) const {
    std::map<uint32_t, uint32_t> tf;
    for (const auto& t : tokenize(text)) {
        auto it = term_ids_.find(t);
        if (it != term_ids_.end()) ++tf[it->second];
    }
    SparseVector vec;
    vec.entries.reserve(tf.size());
    for (const auto& [id, count] : tf) {
        const double idf = std::log((1.0 + n_docs_) / (1.0 + dfs_[id])) + 1.0;
        vec.entries.emplace_back(id, static_cast<float>(count * idf));
    }
    vec.normalize();
    return vec;
}

double TextIndex::cos_tfidf(const SparseVector& query_vec, size_t i) const {
    return query_vec.dot(doc_vectors_[i]);
}

double TextIndex::dense_similarity(const std::vector<float>& query_embedding, size_t i) const {
    return kernels::cosine(query_embedding, embeddings_[i]);
}

double hybrid_score(double cos_tfidf, double reranker, double alpha) {
    if (alpha < 0.0 || alpha > 1.0) throw Error("text alpha must be in [0,1]");
    return alpha * cos_tfidf + (1.0 - alpha) * reranker;
}

namespace {

// Indices of the top-n docs by score, ties broken by ascending uid.
std::vector<size_t> top_pool(const std::vector<double>& scores,
                             const std::vector<std::string>& uids, size_t n) {
    std::vector<size_t> order(scores.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return uids[a] < uids[b];
    });
    if (order.size() > n) order.resize(n);
    return order;
}

}  // namespace

ScoredCandidates retrieve_text(const TextIndex& index, const Query& query,
                               const TextParams& params, const Embedder& embedder,
                               const Reranker& reranker) {
    const std::string query_text = query.text();
    const auto query_vec = index.tfidf_vector(query_text);
    const auto query_embedding = embedder.embed(query_text);

    std::vector<double> sparse_scores(index.size());
    std::vector<double> dense_scores(index.size());
    for (size_t i = 0; i < index.size(); ++i) {
        sparse_scores[i] = index.cos_tfidf(query_vec, i);
        dense_scores[i] = index.dense_similarity(query_embedding, i);
    }

    const auto pool_a = top_pool(sparse_scores, index.uids(), params.pool);
    const auto pool_b = top_pool(dense_scores, index.uids(), params.pool);
    std::vector<size_t> candidates = pool_a;
    candidates.insert(candidates.end(), pool_b.begin(), pool_b.end());
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

    ScoredCandidates hits;
    hits.reserve(candidates.size());
    for (size_t i : candidates) {
        const double cos = sparse_scores[i];
        const double rr = reranker.score(query_text, index.doc_text(i));
        ScoredCandidate hit;
        hit.uid = index.uids()[i];
        hit.score = hybrid_score(cos, rr, params.alpha);
        hit.view = index.doc_body(i);
        hit.signals["cos_tfidf"] = cos;
        hit.signals["reranker"] = rr;
        hits.push_back(std::move(hit));
    }
    std::sort(hits.begin(), hits.end(), [](const ScoredCandidate& a, const ScoredCandidate& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.uid < b.uid;
    });
    if (hits.size() > params.k) hits.resize(params.k);
    return hits;
}

}  // namespace hyfed
