#include "hyfed/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "hyfed/common.hpp"

namespace hyfed {

bool Qrels::relevant(const std::string& query_id, const std::string& uid) const {
    return grade(query_id, uid) > 0;
}

int Qrels::grade(const std::string& query_id, const std::string& uid) const {
    auto q = grades.find(query_id);
    if (q == grades.end()) return 0;
    auto d = q->second.find(uid);
    return d == q->second.end() ? 0 : d->second;
}

double mrr(const Run& run, const Qrels& qrels) {
    if (run.empty()) throw Error("mrr over an empty run set");
    double sum = 0.0;
    for (const auto& [query_id, ranked] : run) {
        for (size_t i = 0; i < ranked.size(); ++i) {
            if (qrels.relevant(query_id, ranked[i])) {
                sum += 1.0 / static_cast<double>(i + 1);
                break;
            }
        }
    }
    return sum / static_cast<double>(run.size());
}

double precision_at_k(const Run& run, const Qrels& qrels, size_t k) {
    if (run.empty() || k == 0) return 0.0;
    double sum = 0.0;
    for (const auto& [query_id, ranked] : run) {
        size_t hits = 0;
        for (size_t i = 0; i < ranked.size() && i < k; ++i)
            if (qrels.relevant(query_id, ranked[i])) ++hits;
        sum += static_cast<double>(hits) / static_cast<double>(k);
    }
    return sum / static_cast<double>(run.size());
}

double hit_at_k(const Run& run, const Qrels& qrels, size_t k) {
    if (run.empty() || k == 0) return 0.0;
    double sum = 0.0;
    for (const auto& [query_id, ranked] : run) {
        for (size_t i = 0; i < ranked.size() && i < k; ++i) {
            if (qrels.relevant(query_id, ranked[i])) {
                sum += 1.0;
                break;
            }
        }
    }
    return sum / static_cast<double>(run.size());
}

double ndcg_at_k(const Run& run, const Qrels& qrels, size_t k) {
    if (run.empty() || k == 0) return 0.0;
    double sum = 0.0;
    size_t counted = 0;
    for (const auto& [query_id, ranked] : run) {
        auto q = qrels.grades.find(query_id);
        if (q == qrels.grades.end() || q->second.empty()) continue;
        ++counted;

        double dcg = 0.0;
        for (size_t i = 0; i < ranked.size() && i < k; ++i) {
            const int g = qrels.grade(query_id, ranked[i]);
            if (g > 0) dcg += (std::pow(2.0, g) - 1.0) / std::log2(static_cast<double>(i + 2));
        }

        std::vector<int> ideal;
        ideal.reserve(q->second.size());
        for (const auto& [uid, g] : q->second) ideal.push_back(g);
        std::sort(ideal.begin(), ideal.end(), std::greater<int>());
        double idcg = 0.0;
        for (size_t i = 0; i < ideal.size() && i < k; ++i)
            idcg += (std::pow(2.0, ideal[i]) - 1.0) / std::log2(static_cast<double>(i + 2));

        if (idcg > 0.0) sum += dcg / idcg;
    }
    return counted == 0 ? 0.0 : sum / static_cast<double>(counted);
}

}  // namespace hyfed
