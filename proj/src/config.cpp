#include "hyfed/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <map>

#include "hyfed/common.hpp"

namespace hyfed {

namespace {

struct KeyBinding {
    std::function<void(AppConfig&, const nlohmann::ordered_json&)> from_json;
    std::function<void(AppConfig&, const std::string&)> from_string;
};

nlohmann::ordered_json parse_scalar(const std::string& value) {
    // Env/flag values arrive as strings; interpret numbers and booleans,
    // fall back to the raw string.
    try {
        return nlohmann::ordered_json::parse(value);
    } catch (const nlohmann::json::exception&) {
        return nlohmann::ordered_json(value);
    }
}

template <typename T>
T get_number(const nlohmann::ordered_json& v, const std::string& key) {
    if (!v.is_number()) throw ConfigError("config key " + key + " must be a number");
    return v.get<T>();
}

std::vector<std::string> get_string_list(const nlohmann::ordered_json& v,
                                         const std::string& key) {
    std::vector<std::string> out;
    if (v.is_string()) {
        // comma-separated form for env/flags
        std::string s = v.get<std::string>();
        size_t pos = 0;
        while (pos <= s.size()) {
            size_t comma = s.find(',', pos);
            if (comma == std::string::npos) comma = s.size();
            std::string item = s.substr(pos, comma - pos);
            if (!item.empty()) out.push_back(item);
            pos = comma + 1;
        }
        return out;
    }
    if (!v.is_array()) throw ConfigError("config key " + key + " must be a string array");
    for (const auto& item : v) {
        if (!item.is_string())
            throw ConfigError("config key " + key + " must contain only strings");
        out.push_back(item.get<std::string>());
    }
    return out;
}

const std::map<std::string, KeyBinding>& registry() {
    static const std::map<std::string, KeyBinding> keys = [] {
        std::map<std::string, KeyBinding> m;
        auto add = [&m](const std::string& key, auto setter) {
            m[key] = KeyBinding{
                [key, setter](AppConfig& c, const nlohmann::ordered_json& v) { setter(c, v, key); },
                [key, setter](AppConfig& c, const std::string& s) {
                    setter(c, parse_scalar(s), key);
                }};
        };
        auto num_d = [](double AppConfig::* field) {
            return [field](AppConfig& c, const nlohmann::ordered_json& v, const std::string& k) {
                c.*field = get_number<double>(v, k);
            };
        };
        auto num_sz = [](size_t AppConfig::* field) {
            return [field](AppConfig& c, const nlohmann::ordered_json& v, const std::string& k) {
                if (v.is_number_float())
                    throw ConfigError("config key " + k + " must be an integer");
                c.*field = get_number<size_t>(v, k);
            };
        };
        auto num_i = [](int AppConfig::* field) {
            return [field](AppConfig& c, const nlohmann::ordered_json& v, const std::string& k) {
                if (v.is_number_float())
                    throw ConfigError("config key " + k + " must be an integer");
                c.*field = get_number<int>(v, k);
            };
        };
        auto str = [](std::string AppConfig::* field) {
            return [field](AppConfig& c, const nlohmann::ordered_json& v, const std::string& k) {
                if (!v.is_string()) throw ConfigError("config key " + k + " must be a string");
                c.*field = v.get<std::string>();
            };
        };
        auto str_list = [](std::vector<std::string> AppConfig::* field) {
            return [field](AppConfig& c, const nlohmann::ordered_json& v, const std::string& k) {
                c.*field = get_string_list(v, k);
            };
        };

        add("seed", [](AppConfig& c, const nlohmann::ordered_json& v, const std::string& k) {
            if (v.is_number_float()) throw ConfigError("config key " + k + " must be an integer");
            c.seed = get_number<uint64_t>(v, k);
        });
        add("log_level", str(&AppConfig::log_level));

        add("text.alpha", num_d(&AppConfig::text_alpha));
        add("text.pool", num_sz(&AppConfig::text_pool));
        add("text.dense_dim", num_sz(&AppConfig::text_dense_dim));

        add("kg.tau", num_d(&AppConfig::kg_tau));
        add("kg.alpha", num_d(&AppConfig::kg_alpha));
        add("kg.semantic_topk", num_sz(&AppConfig::kg_semantic_topk));
        add("kg.exclude_labels", str_list(&AppConfig::kg_exclude_labels));

        add("sql.lambda1", num_d(&AppConfig::sql_lambda1));
        add("sql.lambda2", num_d(&AppConfig::sql_lambda2));
        add("sql.lambda3", num_d(&AppConfig::sql_lambda3));
        add("sql.lambda4", num_d(&AppConfig::sql_lambda4));
        add("sql.n_per_entity", num_sz(&AppConfig::sql_n_per_entity));
        add("sql.bm25_k1", num_d(&AppConfig::sql_bm25_k1));
        add("sql.bm25_b", num_d(&AppConfig::sql_bm25_b));

        add("privacy.recognizers", str_list(&AppConfig::privacy_recognizers));
        add("privacy.person_lexicon", str(&AppConfig::privacy_person_lexicon));
        add("privacy.theta", num_d(&AppConfig::privacy_theta));
        add("privacy.max_summary_tokens", num_sz(&AppConfig::privacy_max_summary_tokens));
        add("privacy.client_key", str(&AppConfig::privacy_client_key));

        add("cache.l1_capacity",
            [](AppConfig& c, const nlohmann::ordered_json& v, const std::string& k) {
                c.cache.l1_capacity = get_number<size_t>(v, k);
            });
        add("cache.l2_capacity",
            [](AppConfig& c, const nlohmann::ordered_json& v, const std::string& k) {
                c.cache.l2_capacity = get_number<size_t>(v, k);
            });
        add("cache.l3_capacity",
            [](AppConfig& c, const nlohmann::ordered_json& v, const std::string& k) {
                c.cache.l3_capacity = get_number<size_t>(v, k);
            });
        add("cache.hotspot_size",
            [](AppConfig& c, const nlohmann::ordered_json& v, const std::string& k) {
                c.cache.hotspot_size = get_number<size_t>(v, k);
            });
        add("cache.l1_ms", [](AppConfig& c, const nlohmann::ordered_json& v, const std::string& k) {
            c.cache.l1_ms = get_number<double>(v, k);
        });
        add("cache.l2_ms", [](AppConfig& c, const nlohmann::ordered_json& v, const std::string& k) {
            c.cache.l2_ms = get_number<double>(v, k);
        });
        add("cache.l3_ms", [](AppConfig& c, const nlohmann::ordered_json& v, const std::string& k) {
            c.cache.l3_ms = get_number<double>(v, k);
        });
        add("cache.miss_ms",
            [](AppConfig& c, const nlohmann::ordered_json& v, const std::string& k) {
                c.cache.miss_ms = get_number<double>(v, k);
            });

        add("workload.restart_prob",
            [](AppConfig& c, const nlohmann::ordered_json& v, const std::string& k) {
                c.workload.restart_prob = get_number<double>(v, k);
            });
        add("workload.dwell_prob",
            [](AppConfig& c, const nlohmann::ordered_json& v, const std::string& k) {
                c.workload.dwell_prob = get_number<double>(v, k);
            });
        add("workload.session_memory_prob",
            [](AppConfig& c, const nlohmann::ordered_json& v, const std::string& k) {
                c.workload.session_memory_prob = get_number<double>(v, k);
            });
        add("workload.memory_window",
            [](AppConfig& c, const nlohmann::ordered_json& v, const std::string& k) {
                c.workload.memory_window = get_number<size_t>(v, k);
            });
        add("workload.warmup",
            [](AppConfig& c, const nlohmann::ordered_json& v, const std::string& k) {
                c.workload.warmup = get_number<size_t>(v, k);
            });
        add("workload.test",
            [](AppConfig& c, const nlohmann::ordered_json& v, const std::string& k) {
                c.workload.test = get_number<size_t>(v, k);
            });

        add("bench.k", num_sz(&AppConfig::bench_k));

        add("services.embedder_url", str(&AppConfig::services_embedder_url));
        add("services.reranker_url", str(&AppConfig::services_reranker_url));
        add("services.ner_url", str(&AppConfig::services_ner_url));
        add("services.summarizer_url", str(&AppConfig::services_summarizer_url));
        add("services.timeout_ms", num_i(&AppConfig::services_timeout_ms));

        add("federation.host", str(&AppConfig::federation_host));
        add("federation.port", num_i(&AppConfig::federation_port));
        add("federation.timeout_ms", num_i(&AppConfig::federation_timeout_ms));
        add("federation.k_global", num_sz(&AppConfig::federation_k_global));
        return m;
    }();
    return keys;
}

void flatten(const nlohmann::ordered_json& node, const std::string& prefix,
             std::vector<std::pair<std::string, nlohmann::ordered_json>>& out) {
    if (node.is_object() && registry().count(prefix) == 0) {
        for (auto it = node.begin(); it != node.end(); ++it) {
            const std::string path = prefix.empty() ? it.key() : prefix + "." + it.key();
            flatten(it.value(), path, out);
        }
        return;
    }
    out.emplace_back(prefix, node);
}

std::string env_name(const std::string& dotted) {
    std::string out = "HYFED_";
    for (char c : dotted) {
        if (c == '.')
            out.push_back('_');
        else
            out.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    }
    return out;
}

}  // namespace

void AppConfig::apply_json(const nlohmann::ordered_json& doc) {
    if (!doc.is_object()) throw ConfigError("config document must be a JSON object");
    std::vector<std::pair<std::string, nlohmann::ordered_json>> entries;
    flatten(doc, "", entries);
    for (const auto& [key, value] : entries) {
        auto it = registry().find(key);
        if (it == registry().end()) throw ConfigError("unknown config key: " + key);
        it->second.from_json(*this, value);
    }
}

void AppConfig::apply_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    nlohmann::ordered_json doc;
    try {
        doc = nlohmann::ordered_json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config file " + path + " is not valid JSON: " + e.what());
    }
    apply_json(doc);
}

void AppConfig::apply_env(const std::function<const char*(const char*)>& getenv_fn) {
    for (const auto& [key, binding] : registry()) {
        const std::string name = env_name(key);
        if (const char* value = getenv_fn(name.c_str())) binding.from_string(*this, value);
    }
}

void AppConfig::apply_env() {
    apply_env([](const char* name) { return std::getenv(name); });
}

void AppConfig::set_key(const std::string& dotted, const std::string& value) {
    auto it = registry().find(dotted);
    if (it == registry().end()) throw ConfigError("unknown config key: " + dotted);
    it->second.from_string(*this, value);
}

std::vector<std::string> AppConfig::known_keys() {
    std::vector<std::string> out;
    out.reserve(registry().size());
    for (const auto& [key, binding] : registry()) out.push_back(key);
    return out;
}

void AppConfig::validate() const {
    auto unit = [](double v, const char* key) {
        if (v < 0.0 || v > 1.0) throw ConfigError(std::string(key) + " must be in [0,1]");
    };
    unit(text_alpha, "text.alpha");
    unit(kg_tau, "kg.tau");
    unit(kg_alpha, "kg.alpha");
    unit(privacy_theta, "privacy.theta");
    if (text_pool < 1) throw ConfigError("text.pool must be >= 1");
    if (text_dense_dim < 1) throw ConfigError("text.dense_dim must be >= 1");
    if (kg_semantic_topk < 1) throw ConfigError("kg.semantic_topk must be >= 1");
    if (sql_lambda1 < 0 || sql_lambda2 < 0 || sql_lambda3 < 0 || sql_lambda4 < 0)
        throw ConfigError("sql.lambda weights must be >= 0");
    if (sql_lambda1 + sql_lambda2 + sql_lambda3 + sql_lambda4 <= 0.0)
        throw ConfigError("sql.lambda weights must sum to > 0");
    if (sql_n_per_entity < 1) throw ConfigError("sql.n_per_entity must be >= 1");
    if (sql_bm25_k1 < 0) throw ConfigError("sql.bm25_k1 must be >= 0");
    if (sql_bm25_b < 0 || sql_bm25_b > 1) throw ConfigError("sql.bm25_b must be in [0,1]");
    for (const auto& r : privacy_recognizers) {
        static const std::vector<std::string> known = {"PERSON", "DATE",        "PHONE",   "EMAIL",
                                                       "ID",     "AGE_OVER_89", "LOCATION"};
        if (std::find(known.begin(), known.end(), r) == known.end())
            throw ConfigError("unknown recognizer: " + r);
    }
    if (bench_k < 1) throw ConfigError("bench.k must be >= 1");
    if (services_timeout_ms < 1) throw ConfigError("services.timeout_ms must be >= 1");
    if (federation_port < 1 || federation_port > 65535)
        throw ConfigError("federation.port must be in [1,65535]");
    if (federation_timeout_ms < 1) throw ConfigError("federation.timeout_ms must be >= 1");
    if (federation_k_global < 1) throw ConfigError("federation.k_global must be >= 1");
    cache.validate();
    workload.validate();
}

}  // namespace hyfed
