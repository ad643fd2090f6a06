#include <atomic>
#include <chrono>
#include <csignal>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "hyfed/bench.hpp"
#include "hyfed/common.hpp"
#include "hyfed/config.hpp"
#include "hyfed/corpus.hpp"
#include "hyfed/federation.hpp"
#include "hyfed/fixtures.hpp"
#include "hyfed/model_service.hpp"
#include "hyfed/models.hpp"
#include "hyfed/privacy.hpp"
#include "hyfed/store.hpp"
#include "hyfed/workload.hpp"

namespace {

using namespace hyfed;

volatile std::sig_atomic_t g_shutdown = 0;

void on_signal(int) { g_shutdown = 1; }

struct GlobalFlags {
    std::string config_path;
    uint64_t seed = 42;
    bool seed_set = false;
    std::string log_level;
    std::string transcript_path;
    std::vector<std::string> overrides;  // key=value
};

AppConfig make_config(const GlobalFlags& g) {
    AppConfig cfg;
    if (!g.config_path.empty()) cfg.apply_file(g.config_path);
    cfg.apply_env();
    if (g.seed_set) cfg.set_key("seed", std::to_string(g.seed));
    if (!g.log_level.empty()) cfg.set_key("log_level", g.log_level);
    for (const auto& kv : g.overrides) {
        const size_t eq = kv.find('=');
        if (eq == std::string::npos) throw UsageError("--set expects key=value, got: " + kv);
        cfg.set_key(kv.substr(0, eq), kv.substr(eq + 1));
    }
    cfg.validate();
    set_log_level(parse_log_level(cfg.log_level));
    return cfg;
}

ModelSet build_models(const AppConfig& cfg) {
    ModelSet models;
    if (cfg.services_embedder_url.empty()) {
        models.embedder = std::make_shared<HashingEmbedder>(cfg.text_dense_dim);
    } else {
        models.embedder = std::make_shared<ServiceEmbedder>(
            ServiceConfig{cfg.services_embedder_url, cfg.services_timeout_ms},
            cfg.text_dense_dim);
    }
    if (cfg.services_reranker_url.empty()) {
        models.reranker = std::make_shared<JaccardReranker>();
    } else {
        models.reranker = std::make_shared<ServiceReranker>(
            ServiceConfig{cfg.services_reranker_url, cfg.services_timeout_ms});
    }
    if (!cfg.services_ner_url.empty())
        models.ner = std::make_shared<ServiceNer>(
            ServiceConfig{cfg.services_ner_url, cfg.services_timeout_ms});
    if (!cfg.services_summarizer_url.empty())
        models.summarizer = std::make_shared<ServiceSummarizer>(
            ServiceConfig{cfg.services_summarizer_url, cfg.services_timeout_ms});
    return models;
}

TextParams text_params(const AppConfig& cfg) {
    TextParams p;
    p.alpha = cfg.text_alpha;
    p.pool = cfg.text_pool;
    p.k = cfg.bench_k;
    return p;
}

KgParams kg_params(const AppConfig& cfg) {
    KgParams p;
    p.tau = cfg.kg_tau;
    p.alpha = cfg.kg_alpha;
    p.semantic_topk = cfg.kg_semantic_topk;
    p.exclude_labels = cfg.kg_exclude_labels;
    p.k = cfg.bench_k;
    return p;
}

SqlParams sql_params(const AppConfig& cfg) {
    SqlParams p;
    p.weights = {cfg.sql_lambda1, cfg.sql_lambda2, cfg.sql_lambda3, cfg.sql_lambda4};
    p.bm25_k1 = cfg.sql_bm25_k1;
    p.bm25_b = cfg.sql_bm25_b;
    p.n_per_entity = cfg.sql_n_per_entity;
    p.k = cfg.bench_k;
    return p;
}

PrivacyConfig privacy_config(const AppConfig& cfg) {
    PrivacyConfig p;
    p.recognizers = cfg.privacy_recognizers;
    if (!cfg.privacy_person_lexicon.empty())
        p.person_lexicon = load_lexicon(cfg.privacy_person_lexicon);
    p.theta = cfg.privacy_theta;
    p.max_summary_tokens = cfg.privacy_max_summary_tokens;
    p.client_key = cfg.privacy_client_key;
    return p;
}

std::pair<std::string, int> parse_host_port(const std::string& s) {
    const size_t colon = s.rfind(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == s.size())
        throw UsageError("expected host:port, got: " + s);
    int port = 0;
    try {
        port = std::stoi(s.substr(colon + 1));
    } catch (const std::exception&) {
        throw UsageError("bad port in: " + s);
    }
    if (port < 1 || port > 65535) throw UsageError("port out of range in: " + s);
    return {s.substr(0, colon), port};
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run_ingest(const GlobalFlags& g, const std::string& input, const std::string& modality,
               const std::string& out) {
    make_config(g);
    const Corpus corpus = ingest_corpus(input, parse_modality(modality));
    save_index(corpus, out);
    nlohmann::ordered_json j;
    j["records"] = corpus.records.size();
    j["modality"] = modality_name(corpus.modality);
    j["out"] = out;
    std::cout << j.dump(2) << "\n";
    return 0;
}

int run_query(const GlobalFlags& g, const std::string& server, const std::string& title,
              const std::string& abstract_text, const std::string& abstract_file, size_t top_k,
              const std::string& query_id) {
    const AppConfig cfg = make_config(g);
    Query query;
    query.title = title;
    query.abstract_text = abstract_file.empty() ? abstract_text : read_file(abstract_file);
    if (!query.valid()) throw UsageError("query needs a title or an abstract");
    const auto [host, port] = parse_host_port(server);
    const GlobalReport report =
        query_server(host, port, query, top_k, query_id, cfg.federation_timeout_ms);
    std::cout << report.to_json().dump(2) << "\n";
    return 0;
}

int run_serve(const GlobalFlags& g) {
    const AppConfig cfg = make_config(g);
    auto transcript = std::make_shared<TranscriptSink>();
    FederationServer core({cfg.federation_k_global, cfg.federation_timeout_ms});
    TcpServer server(core, cfg.federation_host, cfg.federation_port,
                     g.transcript_path.empty() ? nullptr : transcript);
    server.start();
    HYFED_LOG_INFO("listening on %s:%d", cfg.federation_host.c_str(), server.port());
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    while (!g_shutdown) std::this_thread::sleep_for(std::chrono::milliseconds(50));
    server.stop();
    if (!g.transcript_path.empty()) transcript->save(g.transcript_path);
    HYFED_LOG_INFO("shut down, %zu clients were registered", core.roster_size());
    return 0;
}

int run_client(const GlobalFlags& g, const std::string& modality, const std::string& index_dir,
               const std::string& server, const std::string& client_id) {
    const AppConfig cfg = make_config(g);
    const Modality m = parse_modality(modality);
    Corpus corpus = load_index(index_dir);
    if (corpus.modality != m)
        throw Error(std::string("index at ") + index_dir + " was built for modality " +
                    modality_name(corpus.modality) + ", not " + modality);
    ClientParams params;
    params.client_id = client_id.empty() ? "client-" + modality : client_id;
    params.modality = m;
    params.text = text_params(cfg);
    params.kg = kg_params(cfg);
    params.sql = sql_params(cfg);
    params.privacy = privacy_config(cfg);
    params.cache = cfg.cache;
    FederatedClient client(std::move(params), std::move(corpus), build_models(cfg));
    const auto [host, port] = parse_host_port(server);
    run_client_loop(client, host, port, cfg.federation_timeout_ms);
    return 0;
}

int run_bench(const GlobalFlags& g, const std::string& index_dir, const std::string& queries_path,
              const std::string& qrels_path, const std::string& backend,
              const std::string& sweep_spec, const std::string& out_dir, bool backend_set) {
    const AppConfig cfg = make_config(g);
    const Corpus corpus = load_index(index_dir);
    const auto queries = load_queries(queries_path);
    const Qrels qrels = load_qrels(qrels_path);
    BenchParams params;
    params.text = text_params(cfg);
    params.kg = kg_params(cfg);
    params.sql = sql_params(cfg);
    params.k = cfg.bench_k;
    if (backend == "all") {
        params.backends = {Modality::Text, Modality::Sql, Modality::Kg};
    } else {
        params.backends = {parse_modality(backend)};
    }
    const ModelSet models = build_models(cfg);

    BenchReport report;
    const bool sweep_only = !sweep_spec.empty() && !backend_set;
    if (!sweep_only) report = run_benchmark(corpus, queries, qrels, params, models);
    if (!sweep_spec.empty()) {
        const BenchReport sweep =
            run_alpha_sweep(corpus, queries, qrels, params, models, parse_sweep(sweep_spec));
        report.sweep = sweep.sweep;
    }
    write_report(report, out_dir);
    std::cout << report.to_json().dump(2) << "\n";
    return 0;
}

int run_cache_sim(const GlobalFlags& g, const std::string& graph_dir, size_t warmup, size_t test,
                  bool warmup_set, bool test_set, const std::string& csv_path) {
    const AppConfig cfg = make_config(g);
    const Corpus corpus = load_index(graph_dir);
    const AssociationGraph assoc = build_association_graph(corpus);
    WorkloadParams wl = cfg.workload;
    if (g.seed_set) wl.seed = cfg.seed;
    if (warmup_set) wl.warmup = warmup;
    if (test_set) wl.test = test;
    wl.validate();
    const auto trace = generate_workload(assoc, wl);
    std::vector<CacheOutcome> per_event;
    const CacheStats stats = simulate(trace, cfg.cache, assoc, &per_event);
    if (!csv_path.empty()) {
        std::ofstream out(csv_path, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + csv_path);
        out << "seq,node_id,warmup,outcome\n";
        for (size_t i = 0; i < trace.size(); ++i)
            out << trace[i].seq << "," << trace[i].node_id << "," << (trace[i].is_warmup ? 1 : 0)
                << "," << outcome_name(per_event[i]) << "\n";
    }
    nlohmann::ordered_json j;
    j["l1_rate"] = stats.rate(stats.l1_hits);
    j["l2_rate"] = stats.rate(stats.l2_hits);
    j["l3_rate"] = stats.rate(stats.l3_hits);
    j["miss_rate"] = stats.rate(stats.misses);
    j["mean_latency_ms"] = stats.mean_latency_ms(cfg.cache);
    j["baseline_latency_ms"] = cfg.cache.miss_ms;
    j["reduction"] = stats.latency_reduction(cfg.cache);
    std::cout << j.dump(2) << "\n";
    return 0;
}

int run_mask(const GlobalFlags& g, const std::string& in_path, const std::string& out_path,
             const std::string& check_path) {
    const AppConfig cfg = make_config(g);
    const PrivacyConfig privacy = privacy_config(cfg);
    if (!check_path.empty()) {
        const std::string text = read_file(check_path);
        const auto spans = detect_pii(text, privacy);
        nlohmann::ordered_json j;
        j["file"] = check_path;
        j["spans"] = spans.size();
        nlohmann::ordered_json cats = nlohmann::ordered_json::object();
        for (const auto& s : spans) {
            const std::string& c = s.category;
            cats[c] = (cats.contains(c) ? cats[c].get<int>() : 0) + 1;
        }
        j["by_category"] = std::move(cats);
        std::cout << j.dump(2) << "\n";
        return spans.empty() ? 0 : 1;
    }
    if (in_path.empty()) throw UsageError("mask needs --in with --out, or --check");
    const std::string text = read_file(in_path);
    const MaskedText masked = mask(text, detect_pii(text, privacy));
    if (out_path.empty()) {
        std::cout << masked.text;
    } else {
        std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + out_path);
        out << masked.text;
    }
    return 0;
}

int run_fixtures(const GlobalFlags& g, const std::string& dir, bool regen, bool verify) {
    make_config(g);
    if (!regen && !verify) regen = verify = true;
    if (regen) {
        write_fixtures(generate_fixtures(), dir);
        std::cerr << "fixtures written to " << dir << "\n";
    }
    if (verify) {
        const auto drifted = verify_fixtures(dir);
        if (!drifted.empty()) {
            std::cerr << "fixture drift detected:\n";
            for (const auto& rel : drifted) std::cerr << "  " << rel << "\n";
            return 2;
        }
        std::cerr << "fixtures match\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hyfed: hybrid federated retrieval over text, SQL, and knowledge-graph data"};
    app.require_subcommand(1);

    GlobalFlags g;
    app.add_option("--config", g.config_path, "JSON config file");
    app.add_option("--seed", g.seed, "seed for every stochastic component")
        ->each([&g](const std::string&) { g.seed_set = true; });
    app.add_option("--log-level", g.log_level, "debug|info|warn|error|off");
    app.add_option("--record-transcript", g.transcript_path,
                   "write the full wire transcript to this path (serve)");
    app.add_option("--set", g.overrides, "override a config key, e.g. --set text.alpha=0.5")
        ->take_all();

    int rc = 0;

    auto* ingest = app.add_subcommand("ingest", "build an index from a JSONL corpus");
    std::string in_input, in_modality, in_out;
    ingest->add_option("--input", in_input, "corpus JSONL file")->required();
    ingest->add_option("--modality", in_modality, "text|sql|kg")->required();
    ingest->add_option("--out", in_out, "index directory")->required();
    ingest->callback([&] { rc = run_ingest(g, in_input, in_modality, in_out); });

    auto* query = app.add_subcommand("query", "send one query to a running server");
    std::string q_server, q_title, q_abstract, q_abstract_file, q_id = "cli-query";
    size_t q_topk = 10;
    query->add_option("--server", q_server, "host:port")->required();
    query->add_option("--title", q_title, "query title");
    query->add_option("--abstract", q_abstract, "query abstract text");
    query->add_option("--abstract-file", q_abstract_file, "file holding the query abstract");
    query->add_option("--top-k", q_topk, "results per client");
    query->add_option("--query-id", q_id, "id stamped on the request");
    query->callback(
        [&] { rc = run_query(g, q_server, q_title, q_abstract, q_abstract_file, q_topk, q_id); });

    auto* serve = app.add_subcommand("serve", "run the aggregation server");
    serve->callback([&] { rc = run_serve(g); });

    auto* client = app.add_subcommand("client", "run one data-holder client");
    std::string c_modality, c_index, c_server, c_id;
    client->add_option("--modality", c_modality, "text|sql|kg")->required();
    client->add_option("--index", c_index, "index directory")->required();
    client->add_option("--server", c_server, "host:port")->required();
    client->add_option("--client-id", c_id, "roster id (default client-<modality>)");
    client->callback([&] { rc = run_client(g, c_modality, c_index, c_server, c_id); });

    auto* bench = app.add_subcommand("bench", "run retrieval metrics over a query set");
    std::string b_index, b_queries, b_qrels, b_backend = "all", b_sweep, b_out = ".";
    bench->add_option("--index", b_index, "index directory")->required();
    bench->add_option("--queries", b_queries, "LDJSON query file")->required();
    bench->add_option("--qrels", b_qrels, "TSV relevance file")->required();
    auto* backend_opt = bench->add_option("--backend", b_backend, "text|sql|kg|all");
    bench->add_option("--alpha-sweep", b_sweep, "grid start:stop:step, e.g. 0:1:0.1");
    bench->add_option("--out", b_out, "directory for report.json/report.csv");
    bench->callback([&] {
        rc = run_bench(g, b_index, b_queries, b_qrels, b_backend, b_sweep, b_out,
                       backend_opt->count() > 0);
    });

    auto* sim = app.add_subcommand("cache-sim", "replay a synthetic workload against the cache");
    std::string s_graph, s_csv;
    size_t s_warmup = 100, s_test = 500;
    sim->add_option("--graph", s_graph, "index directory providing the association graph")
        ->required();
    auto* warm_opt = sim->add_option("--warmup", s_warmup, "warm-up events");
    auto* test_opt = sim->add_option("--test", s_test, "measured events");
    sim->add_option("--csv", s_csv, "write the per-event trace here");
    sim->callback([&] {
        rc = run_cache_sim(g, s_graph, s_warmup, s_test, warm_opt->count() > 0,
                           test_opt->count() > 0, s_csv);
    });

    auto* mask_cmd = app.add_subcommand("mask", "anonymize a file or check it for identifiers");
    std::string m_in, m_out, m_check;
    mask_cmd->add_option("--in", m_in, "input file");
    mask_cmd->add_option("--out", m_out, "output file (stdout when omitted)");
    mask_cmd->add_option("--check", m_check, "scan this file; exit 1 if any span is found");
    mask_cmd->callback([&] { rc = run_mask(g, m_in, m_out, m_check); });

    auto* fx = app.add_subcommand("fixtures", "regenerate or verify the checked-in fixtures");
    std::string f_dir = "tests/fixtures";
    bool f_regen = false, f_verify = false;
    fx->add_option("--dir", f_dir, "fixture directory");
    fx->add_flag("--regen", f_regen, "rewrite all fixture files");
    fx->add_flag("--verify", f_verify, "fail on any drift from regenerated content");
    fx->callback([&] { rc = run_fixtures(g, f_dir, f_regen, f_verify); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return rc;
}
