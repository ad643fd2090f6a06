#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hyfed/corpus.hpp"
#include "hyfed/kg_retrieval.hpp"
#include "hyfed/metrics.hpp"
#include "hyfed/models.hpp"
#include "hyfed/sql_retrieval.hpp"
#include "hyfed/text_index.hpp"

namespace hyfed {

struct BenchQuery {
    std::string query_id;
    Query query;
};

// Line-delimited JSON {query_id, title, abstract}; errors name the line.
std::vector<BenchQuery> load_queries(const std::string& path);
std::vector<BenchQuery> load_queries_text(const std::string& content);

// TSV query_id<TAB>uid<TAB>grade, grade a positive integer.
Qrels load_qrels(const std::string& path);
Qrels load_qrels_text(const std::string& content);

struct MetricRow {
    std::string backend;
    double mrr = 0.0;
    double p1 = 0.0;
    double p5 = 0.0;
    double p10 = 0.0;
    double ndcg10 = 0.0;
    double hit5 = 0.0;
};

struct SweepRow {
    double alpha = 0.0;
    double mrr = 0.0;
    double ndcg10 = 0.0;
};

struct BenchReport {
    std::vector<MetricRow> rows;
    std::vector<SweepRow> sweep;

    nlohmann::ordered_json to_json() const;
    std::string to_csv() const;
};

struct BenchParams {
    std::vector<Modality> backends = {Modality::Text, Modality::Sql, Modality::Kg};
    TextParams text;
    KgParams kg;
    SqlParams sql;
    size_t k = 10;  // retrieval depth fed to every backend
};

// Ranked uids per query for one backend (shared by bench and acceptance).
Run run_backend(const Corpus& corpus, const std::vector<BenchQuery>& queries, Modality backend,
                const BenchParams& params, const ModelSet& models);

// Table of {MRR, P@1, P@5, P@10, nDCG@10, Hit@5} per requested backend.
// Qrels naming query ids absent from the query file (or uids absent from
// the corpus) are an error listing the offenders.
BenchReport run_benchmark(const Corpus& corpus, const std::vector<BenchQuery>& queries,
                          const Qrels& qrels, const BenchParams& params, const ModelSet& models);

struct SweepSpec {
    double start = 0.0;
    double stop = 1.0;
    double step = 0.1;
};

// "start:stop:step", e.g. "0:1:0.1".
SweepSpec parse_sweep(const std::string& s);
std::vector<double> sweep_grid(const SweepSpec& spec);

// Text retrieval repeated over the alpha grid; one (alpha, MRR, nDCG@10)
// row per grid point.
BenchReport run_alpha_sweep(const Corpus& corpus, const std::vector<BenchQuery>& queries,
                            const Qrels& qrels, const BenchParams& params, const ModelSet& models,
                            const SweepSpec& spec);

// report.json and report.csv under dir; content carries no timestamps so
// reruns are byte-identical.
void write_report(const BenchReport& report, const std::string& dir);

}  // namespace hyfed
