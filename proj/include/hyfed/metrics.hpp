#pragma once

#include <map>
#include <string>
#include <vector>

namespace hyfed {

// query_id -> uid -> relevance grade (positive integers)
struct Qrels {
    std::map<std::string, std::map<std::string, int>> grades;

    bool relevant(const std::string& query_id, const std::string& uid) const;
    int grade(const std::string& query_id, const std::string& uid) const;
};

// query_id -> ranked uids, best first
using Run = std::map<std::string, std::vector<std::string>>;

// Mean over queries of 1/rank of the first relevant uid (0 when none
// retrieved). Empty run set is an error.
double mrr(const Run& run, const Qrels& qrels);

// |relevant in top-k| / k, dividing by k even when fewer results returned.
double precision_at_k(const Run& run, const Qrels& qrels, size_t k);

// 1 if any relevant uid in the top-k, else 0, averaged over queries.
double hit_at_k(const Run& run, const Qrels& qrels, size_t k);

// Gain 2^grade - 1, discount log2(rank+1), ideal from grades sorted
// descending; queries with empty qrels are excluded from the mean.
double ndcg_at_k(const Run& run, const Qrels& qrels, size_t k);

}  // namespace hyfed
