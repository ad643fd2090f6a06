#include <doctest.h>

#include <algorithm>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hyfed/common.hpp"
#include "hyfed/config.hpp"

using namespace hyfed;
using nlohmann::ordered_json;

namespace {

// deterministic fake environment for apply_env
struct FakeEnv {
    std::map<std::string, std::string> vars;

    std::function<const char*(const char*)> fn() const {
        return [this](const char* name) -> const char* {
            auto it = vars.find(name);
            return it == vars.end() ? nullptr : it->second.c_str();
        };
    }
};

}  // namespace

TEST_SUITE("config") {

TEST_CASE("defaults validate") {
    AppConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    CHECK(cfg.seed == 42);
    CHECK(cfg.text_alpha == 0.8);
    CHECK(cfg.kg_tau == 0.9);
    CHECK(cfg.cache.l1_capacity == 64);
    CHECK(cfg.workload.test == 500);
    CHECK(cfg.federation_k_global == 10);
}

TEST_CASE("nested json mirrors dotted keys") {
    AppConfig cfg;
    cfg.apply_json(ordered_json{{"text", ordered_json{{"alpha", 0.3}, {"pool", 25}}},
                                {"kg", ordered_json{{"tau", 0.5}}},
                                {"seed", 7}});
    CHECK(cfg.text_alpha == 0.3);
    CHECK(cfg.text_pool == 25);
    CHECK(cfg.kg_tau == 0.5);
    CHECK(cfg.seed == 7);
}

TEST_CASE("string lists accept arrays and comma form") {
    AppConfig cfg;
    cfg.apply_json(ordered_json{
        {"privacy", ordered_json{{"recognizers", ordered_json::array({"DATE", "EMAIL"})}}}});
    CHECK(cfg.privacy_recognizers == std::vector<std::string>{"DATE", "EMAIL"});
    cfg.set_key("privacy.recognizers", "PERSON,ID");
    CHECK(cfg.privacy_recognizers == std::vector<std::string>{"PERSON", "ID"});
}

TEST_CASE("unknown keys are rejected") {
    AppConfig cfg;
    CHECK_THROWS_AS(cfg.apply_json(ordered_json{{"txet", ordered_json{{"alpha", 0.3}}}}),
                    ConfigError);
    CHECK_THROWS_AS(cfg.apply_json(ordered_json{{"text", ordered_json{{"alhpa", 0.3}}}}),
                    ConfigError);
    CHECK_THROWS_AS(cfg.set_key("no.such.key", "1"), ConfigError);
    CHECK_THROWS_AS(cfg.apply_json(ordered_json::array({1, 2})), ConfigError);
}

TEST_CASE("type errors name the key") {
    AppConfig cfg;
    try {
        cfg.apply_json(ordered_json{{"text", ordered_json{{"alpha", "high"}}}});
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("text.alpha") != std::string::npos);
    }
    CHECK_THROWS_AS(cfg.apply_json(ordered_json{{"text", ordered_json{{"pool", 2.5}}}}),
                    ConfigError);
    CHECK_THROWS_AS(cfg.apply_json(ordered_json{{"seed", 1.5}}), ConfigError);
    CHECK_THROWS_AS(cfg.apply_json(ordered_json{{"log_level", 3}}), ConfigError);
}

TEST_CASE("config files load and reject bad json") {
    namespace fs = std::filesystem;
    const fs::path good = fs::temp_directory_path() / "hyfed_test_config.json";
    {
        std::ofstream out(good);
        out << "{\"bench\": {\"k\": 5}, \"federation\": {\"port\": 9000}}";
    }
    AppConfig cfg;
    cfg.apply_file(good.string());
    CHECK(cfg.bench_k == 5);
    CHECK(cfg.federation_port == 9000);
    fs::remove(good);

    const fs::path bad = fs::temp_directory_path() / "hyfed_test_config_bad.json";
    {
        std::ofstream out(bad);
        out << "{not json";
    }
    CHECK_THROWS_AS(cfg.apply_file(bad.string()), ConfigError);
    fs::remove(bad);
    CHECK_THROWS_AS(cfg.apply_file((fs::temp_directory_path() / "absent.json").string()),
                    ConfigError);
}

TEST_CASE("environment variables map dotted keys to HYFED_ names") {
    FakeEnv env;
    env.vars["HYFED_TEXT_ALPHA"] = "0.25";
    env.vars["HYFED_KG_SEMANTIC_TOPK"] = "9";
    env.vars["HYFED_FEDERATION_HOST"] = "0.0.0.0";
    env.vars["HYFED_PRIVACY_RECOGNIZERS"] = "DATE,ID";
    env.vars["UNRELATED"] = "ignored";
    AppConfig cfg;
    cfg.apply_env(env.fn());
    CHECK(cfg.text_alpha == 0.25);
    CHECK(cfg.kg_semantic_topk == 9);
    CHECK(cfg.federation_host == "0.0.0.0");
    CHECK(cfg.privacy_recognizers == std::vector<std::string>{"DATE", "ID"});
}

TEST_CASE("later layers override earlier ones") {
    AppConfig cfg;
    cfg.apply_json(ordered_json{{"text", ordered_json{{"alpha", 0.1}}}});
    FakeEnv env;
    env.vars["HYFED_TEXT_ALPHA"] = "0.2";
    cfg.apply_env(env.fn());
    CHECK(cfg.text_alpha == 0.2);
    cfg.set_key("text.alpha", "0.9");  // flag layer
    CHECK(cfg.text_alpha == 0.9);
}

TEST_CASE("set_key keeps plain strings that look unlike json") {
    AppConfig cfg;
    cfg.set_key("federation.host", "localhost");
    CHECK(cfg.federation_host == "localhost");
    cfg.set_key("privacy.person_lexicon", "data/names.txt");
    CHECK(cfg.privacy_person_lexicon == "data/names.txt");
    cfg.set_key("seed", "123");
    CHECK(cfg.seed == 123);
    CHECK_THROWS_AS(cfg.set_key("seed", "abc"), ConfigError);
}

TEST_CASE("validate flags out-of-range values with the dotted key") {
    auto expect_mentions = [](AppConfig& cfg, const std::string& fragment) {
        try {
            cfg.validate();
            FAIL("expected ConfigError mentioning " << fragment);
        } catch (const ConfigError& e) {
            CHECK(std::string(e.what()).find(fragment) != std::string::npos);
        }
    };
    AppConfig alpha;
    alpha.text_alpha = 1.5;
    expect_mentions(alpha, "text.alpha");
    AppConfig tau;
    tau.kg_tau = -0.1;
    expect_mentions(tau, "kg.tau");
    AppConfig lambda;
    lambda.sql_lambda2 = -0.5;
    expect_mentions(lambda, "sql.lambda");
    AppConfig zero_sum;
    zero_sum.sql_lambda1 = zero_sum.sql_lambda2 = 0.0;
    zero_sum.sql_lambda3 = zero_sum.sql_lambda4 = 0.0;
    expect_mentions(zero_sum, "sum");
    AppConfig recog;
    recog.privacy_recognizers = {"PERSON", "RETINA"};
    expect_mentions(recog, "RETINA");
    AppConfig port;
    port.federation_port = 70000;
    expect_mentions(port, "federation.port");
    AppConfig b;
    b.sql_bm25_b = 1.2;
    expect_mentions(b, "sql.bm25_b");
    AppConfig pool;
    pool.text_pool = 0;
    expect_mentions(pool, "text.pool");
    AppConfig cache_bad;
    cache_bad.cache.l1_capacity = 0;
    CHECK_THROWS_AS(cache_bad.validate(), ConfigError);
    AppConfig workload_bad;
    workload_bad.workload.restart_prob = 2.0;
    CHECK_THROWS_AS(workload_bad.validate(), ConfigError);
}

TEST_CASE("known keys are sorted and settable") {
    const auto keys = AppConfig::known_keys();
    CHECK(std::is_sorted(keys.begin(), keys.end()));
    CHECK(std::find(keys.begin(), keys.end(), "text.alpha") != keys.end());
    CHECK(std::find(keys.begin(), keys.end(), "cache.miss_ms") != keys.end());
    CHECK(std::find(keys.begin(), keys.end(), "workload.memory_window") != keys.end());
    // every advertised key accepts a round-trip through set_key
    AppConfig cfg;
    for (const auto& key : keys) {
        if (key == "privacy.recognizers") {
            cfg.set_key(key, "DATE");
        } else if (key == "kg.exclude_labels") {
            cfg.set_key(key, "Patient");
        } else if (key == "log_level" ) {
            cfg.set_key(key, "debug");
        } else if (key.find("url") != std::string::npos || key.find("host") != std::string::npos ||
                   key.find("lexicon") != std::string::npos || key.find("client_key") != std::string::npos) {
            cfg.set_key(key, "value");
        } else {
            cfg.set_key(key, "1");
        }
    }
    CHECK(cfg.text_alpha == 1.0);
    CHECK(cfg.cache.l1_capacity == 1);
}

}  // TEST_SUITE
