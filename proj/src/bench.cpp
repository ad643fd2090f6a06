#include "hyfed/bench.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "hyfed/common.hpp"

namespace hyfed {

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Shortest round-trip decimal form, deterministic across runs.
std::string fmt(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

}  // namespace

std::vector<BenchQuery> load_queries_text(const std::string& content) {
    std::vector<BenchQuery> out;
    std::set<std::string> seen;
    size_t line_no = 0;
    std::istringstream in(content);
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::ordered_json j;
        try {
            j = nlohmann::ordered_json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError("queries line " + std::to_string(line_no) + ": " + e.what());
        }
        BenchQuery q;
        try {
            q.query_id = j.at("query_id").get<std::string>();
            q.query.title = j.value("title", "");
            q.query.abstract_text = j.value("abstract", "");
        } catch (const nlohmann::json::exception& e) {
            throw ParseError("queries line " + std::to_string(line_no) + ": " + e.what());
        }
        if (q.query_id.empty())
            throw ParseError("queries line " + std::to_string(line_no) + ": empty query_id");
        if (!seen.insert(q.query_id).second)
            throw ParseError("queries line " + std::to_string(line_no) + ": duplicate query_id " +
                             q.query_id);
        if (!q.query.valid())
            throw ParseError("queries line " + std::to_string(line_no) + ": empty query text");
        out.push_back(std::move(q));
    }
    return out;
}

std::vector<BenchQuery> load_queries(const std::string& path) {
    return load_queries_text(read_file(path));
}

Qrels load_qrels_text(const std::string& content) {
    Qrels qrels;
    size_t line_no = 0;
    std::istringstream in(content);
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const size_t tab1 = line.find('\t');
        const size_t tab2 = tab1 == std::string::npos ? std::string::npos
                                                      : line.find('\t', tab1 + 1);
        if (tab2 == std::string::npos)
            throw ParseError("qrels line " + std::to_string(line_no) +
                             ": expected query_id<TAB>uid<TAB>grade");
        const std::string query_id = line.substr(0, tab1);
        const std::string uid = line.substr(tab1 + 1, tab2 - tab1 - 1);
        const std::string grade_str = line.substr(tab2 + 1);
        int grade = 0;
        auto [ptr, ec] = std::from_chars(grade_str.data(), grade_str.data() + grade_str.size(),
                                         grade);
        if (ec != std::errc() || ptr != grade_str.data() + grade_str.size() || grade < 1)
            throw ParseError("qrels line " + std::to_string(line_no) +
                             ": grade must be a positive integer");
        if (query_id.empty() || uid.empty())
            throw ParseError("qrels line " + std::to_string(line_no) + ": empty query_id or uid");
        qrels.grades[query_id][uid] = grade;
    }
    return qrels;
}

Qrels load_qrels(const std::string& path) { return load_qrels_text(read_file(path)); }

Run run_backend(const Corpus& corpus, const std::vector<BenchQuery>& queries, Modality backend,
                const BenchParams& params, const ModelSet& models) {
    Run run;
    switch (backend) {
        case Modality::Text: {
            TextParams p = params.text;
            p.k = params.k;
            const TextIndex index(corpus, *models.embedder);
            for (const auto& q : queries) {
                std::vector<std::string> uids;
                for (const auto& c :
                     retrieve_text(index, q.query, p, *models.embedder, *models.reranker))
                    uids.push_back(c.uid);
                run[q.query_id] = std::move(uids);
            }
            break;
        }
        case Modality::Sql: {
            SqlParams p = params.sql;
            p.k = params.k;
            const RelationalStore store(corpus);
            const DictionaryNer ner(corpus_entity_names(corpus));
            const Ner& extractor = models.ner ? *models.ner : static_cast<const Ner&>(ner);
            for (const auto& q : queries) {
                std::vector<std::string> uids;
                for (const auto& c : retrieve_sql(store, q.query, extractor, *models.embedder,
                                                  *models.reranker, p))
                    uids.push_back(c.uid);
                run[q.query_id] = std::move(uids);
            }
            break;
        }
        case Modality::Kg: {
            KgParams p = params.kg;
            p.k = params.k;
            const PropertyGraph graph = build_graph(corpus);
            const DictionaryNer ner(corpus_entity_names(corpus));
            const Ner& extractor = models.ner ? *models.ner : static_cast<const Ner&>(ner);
            for (const auto& q : queries) {
                std::vector<std::string> uids;
                for (const auto& c :
                     retrieve_kg(graph, q.query, extractor, *models.reranker, p).candidates)
                    uids.push_back(c.uid);
                run[q.query_id] = std::move(uids);
            }
            break;
        }
    }
    return run;
}

namespace {

void check_qrels(const Corpus& corpus, const std::vector<BenchQuery>& queries,
                 const Qrels& qrels) {
    std::set<std::string> known_ids;
    for (const auto& q : queries) known_ids.insert(q.query_id);
    std::vector<std::string> unknown_queries;
    std::vector<std::string> unknown_uids;
    for (const auto& [query_id, uids] : qrels.grades) {
        if (!known_ids.count(query_id)) unknown_queries.push_back(query_id);
        for (const auto& [uid, grade] : uids)
            if (!corpus.find(uid)) unknown_uids.push_back(uid);
    }
    auto join = [](const std::vector<std::string>& items) {
        std::string out;
        for (const auto& item : items) {
            if (!out.empty()) out += ", ";
            out += item;
        }
        return out;
    };
    if (!unknown_queries.empty())
        throw Error("qrels reference unknown query ids: " + join(unknown_queries));
    if (!unknown_uids.empty()) throw Error("qrels reference unknown uids: " + join(unknown_uids));
}

MetricRow metric_row(const std::string& backend, const Run& run, const Qrels& qrels) {
    MetricRow row;
    row.backend = backend;
    row.mrr = mrr(run, qrels);
    row.p1 = precision_at_k(run, qrels, 1);
    row.p5 = precision_at_k(run, qrels, 5);
    row.p10 = precision_at_k(run, qrels, 10);
    row.ndcg10 = ndcg_at_k(run, qrels, 10);
    row.hit5 = hit_at_k(run, qrels, 5);
    return row;
}

}  // namespace

BenchReport run_benchmark(const Corpus& corpus, const std::vector<BenchQuery>& queries,
                          const Qrels& qrels, const BenchParams& params, const ModelSet& models) {
    check_qrels(corpus, queries, qrels);
    BenchReport report;
    for (const Modality backend : params.backends) {
        const Run run = run_backend(corpus, queries, backend, params, models);
        report.rows.push_back(metric_row(modality_name(backend), run, qrels));
    }
    return report;
}

SweepSpec parse_sweep(const std::string& s) {
    SweepSpec spec;
    const size_t c1 = s.find(':');
    const size_t c2 = c1 == std::string::npos ? std::string::npos : s.find(':', c1 + 1);
    if (c2 == std::string::npos) throw UsageError("sweep spec must be start:stop:step, got " + s);
    try {
        spec.start = std::stod(s.substr(0, c1));
        spec.stop = std::stod(s.substr(c1 + 1, c2 - c1 - 1));
        spec.step = std::stod(s.substr(c2 + 1));
    } catch (const std::exception&) {
        throw UsageError("sweep spec must be start:stop:step, got " + s);
    }
    if (spec.step <= 0) throw UsageError("sweep step must be > 0");
    if (spec.stop < spec.start) throw UsageError("sweep stop must be >= start");
    return spec;
}

std::vector<double> sweep_grid(const SweepSpec& spec) {
    std::vector<double> grid;
    const size_t n = static_cast<size_t>(std::floor((spec.stop - spec.start) / spec.step + 1e-9));
    for (size_t i = 0; i <= n; ++i) {
        // snap to 9 decimals so 0.1 steps land on exact grid values
        const double v = std::round((spec.start + spec.step * i) * 1e9) / 1e9;
        grid.push_back(v);
    }
    return grid;
}

BenchReport run_alpha_sweep(const Corpus& corpus, const std::vector<BenchQuery>& queries,
                            const Qrels& qrels, const BenchParams& params, const ModelSet& models,
                            const SweepSpec& spec) {
    check_qrels(corpus, queries, qrels);
    BenchReport report;
    const TextIndex index(corpus, *models.embedder);
    TextParams p = params.text;
    p.k = params.k;
    for (const double alpha : sweep_grid(spec)) {
        p.alpha = alpha;
        Run run;
        for (const auto& q : queries) {
            std::vector<std::string> uids;
            for (const auto& c :
                 retrieve_text(index, q.query, p, *models.embedder, *models.reranker))
                uids.push_back(c.uid);
            run[q.query_id] = std::move(uids);
        }
        SweepRow row;
        row.alpha = alpha;
        row.mrr = mrr(run, qrels);
        row.ndcg10 = ndcg_at_k(run, qrels, 10);
        report.sweep.push_back(row);
    }
    return report;
}

nlohmann::ordered_json BenchReport::to_json() const {
    nlohmann::ordered_json j;
    nlohmann::ordered_json backends = nlohmann::ordered_json::array();
    for (const auto& row : rows) {
        nlohmann::ordered_json r;
        r["backend"] = row.backend;
        r["MRR"] = row.mrr;
        r["P@1"] = row.p1;
        r["P@5"] = row.p5;
        r["P@10"] = row.p10;
        r["nDCG@10"] = row.ndcg10;
        r["Hit@5"] = row.hit5;
        backends.push_back(std::move(r));
    }
    j["backends"] = std::move(backends);
    nlohmann::ordered_json sweep_json = nlohmann::ordered_json::array();
    for (const auto& row : sweep) {
        nlohmann::ordered_json r;
        r["alpha"] = row.alpha;
        r["MRR"] = row.mrr;
        r["nDCG@10"] = row.ndcg10;
        sweep_json.push_back(std::move(r));
    }
    j["alpha_sweep"] = std::move(sweep_json);
    return j;
}

std::string BenchReport::to_csv() const {
    std::string out;
    if (!rows.empty()) {
        out += "backend,MRR,P@1,P@5,P@10,nDCG@10,Hit@5\n";
        for (const auto& row : rows)
            out += row.backend + "," + fmt(row.mrr) + "," + fmt(row.p1) + "," + fmt(row.p5) + "," +
                   fmt(row.p10) + "," + fmt(row.ndcg10) + "," + fmt(row.hit5) + "\n";
    }
    if (!sweep.empty()) {
        if (!out.empty()) out += "\n";
        out += "alpha,MRR,nDCG@10\n";
        for (const auto& row : sweep)
            out += fmt(row.alpha) + "," + fmt(row.mrr) + "," + fmt(row.ndcg10) + "\n";
    }
    return out;
}

void write_report(const BenchReport& report, const std::string& dir) {
    std::filesystem::create_directories(dir);
    {
        const std::string path = (std::filesystem::path(dir) / "report.json").string();
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + path);
        out << report.to_json().dump(2) << "\n";
    }
    {
        const std::string path = (std::filesystem::path(dir) / "report.csv").string();
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + path);
        out << report.to_csv();
    }
}

}  // namespace hyfed
