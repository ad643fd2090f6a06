#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hyfed/cache.hpp"
#include "hyfed/workload.hpp"

namespace hyfed {

// Merged runtime configuration. Precedence: built-in defaults, then config
// file, then HYFED_* environment variables, then command-line flags.
struct AppConfig {
    uint64_t seed = 42;
    std::string log_level = "info";

    double text_alpha = 0.8;
    size_t text_pool = 50;
    size_t text_dense_dim = 256;

    double kg_tau = 0.9;
    double kg_alpha = 0.5;
    size_t kg_semantic_topk = 5;
    std::vector<std::string> kg_exclude_labels = {"Patient"};

    double sql_lambda1 = 0.4;
    double sql_lambda2 = 0.2;
    double sql_lambda3 = 0.2;
    double sql_lambda4 = 0.2;
    size_t sql_n_per_entity = 20;
    double sql_bm25_k1 = 1.2;
    double sql_bm25_b = 0.75;

    std::vector<std::string> privacy_recognizers = {"PERSON", "DATE",  "PHONE",
                                                    "EMAIL",  "ID",    "AGE_OVER_89"};
    std::string privacy_person_lexicon;  // path; loaded lazily where needed
    double privacy_theta = 0.35;
    size_t privacy_max_summary_tokens = 120;
    std::string privacy_client_key = "hyfed-dev-key";

    TierConfig cache;
    WorkloadParams workload;

    size_t bench_k = 10;

    std::string services_embedder_url;
    std::string services_reranker_url;
    std::string services_ner_url;
    std::string services_summarizer_url;
    int services_timeout_ms = 10000;

    std::string federation_host = "127.0.0.1";
    int federation_port = 8470;
    int federation_timeout_ms = 30000;
    size_t federation_k_global = 10;

    // Apply a JSON config document (nested objects mirror dotted keys).
    // Unknown keys are rejected.
    void apply_json(const nlohmann::ordered_json& doc);
    void apply_file(const std::string& path);

    // HYFED_<KEY> with dots mapped to underscores, uppercased; getenv is
    // injectable for tests.
    void apply_env(const std::function<const char*(const char*)>& getenv_fn);
    void apply_env();

    // Range checks across every module's keys; throws ConfigError.
    void validate() const;

    // All recognized dotted keys, sorted (exposed for --help and tests).
    static std::vector<std::string> known_keys();

    // Set one dotted key from a string value (flag/env plumbing).
    void set_key(const std::string& dotted, const std::string& value);
};

}  // namespace hyfed
