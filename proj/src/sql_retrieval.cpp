#include "hyfed/sql_retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "hyfed/common.hpp"
#include "hyfed/kernels.hpp"
#include "hyfed/tokenizer.hpp"

namespace hyfed {

RelationalStore::RelationalStore(const Corpus& corpus) {
    double total_len = 0.0;
    for (const auto& rec : corpus.records) {
        std::vector<std::pair<std::string, std::string>> cols;
        if (!rec.title.empty()) cols.emplace_back("title", rec.title);
        if (!rec.body.empty()) cols.emplace_back("body", rec.body);
        for (const auto& [name, value] : rec.fields)
            if (!value.empty()) cols.emplace_back(name, value);

        std::string text;
        for (const auto& [name, value] : cols) {
            if (!text.empty()) text += " ";
            text += value;
        }

        auto toks = tokenize(text);
        std::map<std::string, uint32_t> tf;
        for (const auto& t : toks) ++tf[t];

        const size_t row = uids_.size();
        for (const auto& [term, count] : tf) postings_[term].emplace_back(row, count);
        by_uid_.emplace(rec.uid, row);
        uids_.push_back(rec.uid);
        columns_.push_back(std::move(cols));
        texts_.push_back(std::move(text));
        lens_.push_back(static_cast<double>(toks.size()));
        tokens_.push_back(std::move(toks));
        tfs_.push_back(std::move(tf));
        total_len += lens_.back();
    }
    avg_len_ = uids_.empty() ? 0.0 : total_len / static_cast<double>(uids_.size());
}

bool RelationalStore::has(const std::string& uid) const { return by_uid_.count(uid) > 0; }

size_t RelationalStore::index_of(const std::string& uid) const {
    auto it = by_uid_.find(uid);
    if (it == by_uid_.end()) throw Error("unknown uid " + uid);
    return it->second;
}

const std::string& RelationalStore::row_text(const std::string& uid) const {
    return texts_[index_of(uid)];
}

std::string RelationalStore::render_view(const std::string& uid) const {
    std::string out;
    for (const auto& [name, value] : columns_[index_of(uid)]) {
        if (!out.empty()) out += "\n";
        out += name;
        out += ": ";
        out += value;
        out += "; ";
    }
    return out;
}

double RelationalStore::idf(const std::string& term) const {
    const double n = static_cast<double>(uids_.size());
    auto it = postings_.find(term);
    const double df = it == postings_.end() ? 0.0 : static_cast<double>(it->second.size());
    return std::log((1.0 + n) / (1.0 + df)) + 1.0;
}

std::vector<std::string> RelationalStore::candidate_rows(const std::string& entity) const {
    std::set<size_t> rows;
    const auto toks = tokenize(entity);
    const std::set<std::string> distinct(toks.begin(), toks.end());
    for (const auto& t : distinct) {
        auto it = postings_.find(t);
        if (it == postings_.end()) continue;
        for (const auto& [row, tf] : it->second) rows.insert(row);
    }
    std::vector<std::string> out;
    out.reserve(rows.size());
    for (size_t row : rows) out.push_back(uids_[row]);
    std::sort(out.begin(), out.end());
    return out;
}

double RelationalStore::boolean_score(const std::string& entity, const std::string& uid) const {
    const size_t row = index_of(uid);
    const auto toks = tokenize(entity);
    const std::set<std::string> distinct(toks.begin(), toks.end());
    double score = 0.0;
    for (const auto& t : distinct)
        if (tfs_[row].count(t)) score += idf(t);
    return score;
}

double RelationalStore::natural_language_score(const std::string& entity, const std::string& uid,
                                               const SqlParams& params) const {
    const size_t row = index_of(uid);
    const double len_ratio = avg_len_ == 0.0 ? 0.0 : lens_[row] / avg_len_;
    double score = 0.0;
    for (const auto& t : tokenize(entity)) {
        auto it = tfs_[row].find(t);
        if (it == tfs_[row].end()) continue;
        const double tf = static_cast<double>(it->second);
        score += idf(t) * (tf * (params.bm25_k1 + 1.0)) /
                 (tf + params.bm25_k1 * (1.0 - params.bm25_b + params.bm25_b * len_ratio));
    }
    return score;
}

int RelationalStore::exact_match(const std::string& entity, const std::string& uid) const {
    const auto needle = tokenize(entity);
    if (needle.empty()) return 0;
    const auto& hay = tokens_[index_of(uid)];
    if (needle.size() > hay.size()) return 0;
    for (size_t i = 0; i + needle.size() <= hay.size(); ++i) {
        if (std::equal(needle.begin(), needle.end(), hay.begin() + i)) return 1;
    }
    return 0;
}

double RelationalStore::phrase_similarity(const std::string& entity, const std::string& uid,
                                          const Embedder& embedder) const {
    const auto e_vec = embedder.embed(entity);
    const auto d_vec = embedder.embed(texts_[index_of(uid)]);
    const double cos = kernels::cosine(e_vec, d_vec);
    return std::clamp(cos, 0.0, 1.0);
}

double combined_score(int exact, double s_bool, double s_nl, double s_sim,
                      const FusionWeights& w, double bool_divisor) {
    return w.lambda1 * exact + w.lambda2 * std::min(s_bool / bool_divisor, 1.0) +
           w.lambda3 * std::min(s_nl, 1.0) + w.lambda4 * s_sim;
}

ScoredCandidates retrieve_sql(const RelationalStore& store, const Query& query, const Ner& ner,
                              const Embedder& embedder, const Reranker& reranker,
                              const SqlParams& params) {
    const std::string query_text = query.text();
    std::vector<std::string> entities = ner.extract(query_text);
    if (entities.empty()) entities.push_back(query_text);

    struct Entry {
        int exact = 0;
        double s_bool = 0.0;
        double s_nl = 0.0;
        double s_sim = 0.0;
        double s_combined = 0.0;
    };
    std::map<std::string, Entry> merged;  // uid -> best entity-level entry

    for (const auto& entity : entities) {
        struct Scored {
            std::string uid;
            Entry entry;
        };
        std::vector<Scored> scored;
        for (const auto& uid : store.candidate_rows(entity)) {
            Scored s;
            s.uid = uid;
            s.entry.exact = store.exact_match(entity, uid);
            s.entry.s_bool = store.boolean_score(entity, uid);
            s.entry.s_nl = store.natural_language_score(entity, uid, params);
            s.entry.s_sim = store.phrase_similarity(entity, uid, embedder);
            s.entry.s_combined = combined_score(s.entry.exact, s.entry.s_bool, s.entry.s_nl,
                                                s.entry.s_sim, params.weights,
                                                params.bool_divisor);
            scored.push_back(std::move(s));
        }
        std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
            if (a.entry.exact != b.entry.exact) return a.entry.exact > b.entry.exact;
            if (a.entry.s_combined != b.entry.s_combined)
                return a.entry.s_combined > b.entry.s_combined;
            return a.uid < b.uid;
        });
        if (scored.size() > params.n_per_entity) scored.resize(params.n_per_entity);

        for (auto& s : scored) {
            auto it = merged.find(s.uid);
            if (it == merged.end() || s.entry.s_combined > it->second.s_combined)
                merged[s.uid] = s.entry;
        }
    }

    ScoredCandidates hits;
    hits.reserve(merged.size());
    for (const auto& [uid, entry] : merged) {
        ScoredCandidate hit;
        hit.uid = uid;
        hit.score = reranker.score(query_text, store.row_text(uid));
        hit.view = store.render_view(uid);
        hit.signals["exact"] = entry.exact;
        hit.signals["s_bool"] = entry.s_bool;
        hit.signals["s_bool_clamped"] = std::min(entry.s_bool / params.bool_divisor, 1.0);
        hit.signals["s_nl"] = entry.s_nl;
        hit.signals["s_nl_clamped"] = std::min(entry.s_nl, 1.0);
        hit.signals["s_sim"] = entry.s_sim;
        hit.signals["s_combined"] = entry.s_combined;
        hit.signals["s_rerank"] = hit.score;
        hits.push_back(std::move(hit));
    }
    std::sort(hits.begin(), hits.end(), [](const ScoredCandidate& a, const ScoredCandidate& b) {
        if (a.score != b.score) return a.score > b.score;
        const double ac = a.signals.at("s_combined");
        const double bc = b.signals.at("s_combined");
        if (ac != bc) return ac > bc;
        return a.uid < b.uid;
    });
    if (hits.size() > params.k) hits.resize(params.k);
    return hits;
}

}  // namespace hyfed
