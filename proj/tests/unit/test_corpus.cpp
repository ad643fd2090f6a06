#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "hyfed/common.hpp"
#include "hyfed/corpus.hpp"
#include "hyfed/store.hpp"

using namespace hyfed;

namespace {

template <typename F>
std::string error_of(F&& f) {
    try {
        f();
    } catch (const std::exception& e) {
        return e.what();
    }
    return "";
}

Corpus tiny_corpus() {
    const std::string jsonl =
        R"({"uid":"p1","title":"Asthma case","body":"Severe asthma attack.","triples":[["p1","HAS_DISEASE","asthma"]]})"
        "\n"
        R"({"uid":"p2","title":"Also asthma","body":"Mild asthma.","triples":[["p2","HAS_DISEASE","asthma"],["p2","TREATED_WITH","albuterol"]]})"
        "\n"
        R"({"uid":"p3","title":"Fracture","body":"Left femur fracture.","fields":{"age":"40"}})"
        "\n";
    return ingest_corpus_text(jsonl, Modality::Kg);
}

}  // namespace

TEST_SUITE("corpus") {

TEST_CASE("ingest parses uids, fields, and triples") {
    const Corpus c = tiny_corpus();
    REQUIRE(c.size() == 3);
    CHECK(c.records[0].uid == "p1");
    CHECK(c.records[2].fields == std::vector<std::pair<std::string, std::string>>{{"age", "40"}});
    REQUIRE(c.records[1].triples.size() == 2);
    CHECK(c.records[1].triples[1] == Triple{"p2", "TREATED_WITH", "albuterol"});
    CHECK(c.find("p2") != nullptr);
    CHECK(c.find("nope") == nullptr);
}

TEST_CASE("ingest errors name the offending line") {
    CHECK(error_of([] { ingest_corpus_text("{not json", Modality::Text); }).find("line 1") !=
          std::string::npos);
    const std::string no_uid = R"({"title":"x","body":"y"})" "\n";
    CHECK(error_of([&] { ingest_corpus_text(no_uid, Modality::Text); }).find("line 1") !=
          std::string::npos);
    const std::string dup =
        R"({"uid":"p1","title":"a","body":"b"})" "\n" R"({"uid":"p1","title":"c","body":"d"})" "\n";
    CHECK(error_of([&] { ingest_corpus_text(dup, Modality::Text); }).find("p1") !=
          std::string::npos);
}

TEST_CASE("vocabulary holds document frequencies over token sets") {
    const Corpus c = tiny_corpus();
    CHECK(c.vocabulary.at("asthma") == 2);  // p1 and p2, repeats inside a doc count once
    CHECK(c.vocabulary.at("fracture") == 1);
    CHECK(c.vocabulary.count("nonexistent") == 0);
}

TEST_CASE("query text and validity") {
    Query q;
    q.title = "Asthma attack";
    q.abstract_text = "acute onset";
    CHECK(q.text() == "Asthma attack acute onset");
    CHECK(q.valid());
    Query title_only{"Asthma", ""};
    CHECK(title_only.text() == "Asthma");
    CHECK(title_only.valid());
    Query blank{"  ", " "};
    CHECK(!blank.valid());
}

TEST_CASE("modality names round-trip") {
    CHECK(parse_modality("text") == Modality::Text);
    CHECK(parse_modality("sql") == Modality::Sql);
    CHECK(parse_modality("kg") == Modality::Kg);
    CHECK(std::string(modality_name(Modality::Kg)) == "kg");
    CHECK_THROWS_AS(parse_modality("graph"), Error);
}

TEST_CASE("property graph wires patients to entities") {
    const Corpus c = tiny_corpus();
    const PropertyGraph g = build_graph(c);
    REQUIRE(g.name_index.count("asthma") == 1);
    REQUIRE(g.name_index.count("p1") == 1);
    const uint32_t asthma = g.name_index.at("asthma");
    CHECK(!g.is_patient(asthma));
    CHECK(g.is_patient(g.name_index.at("p1")));
    // p1 and p2 both touch asthma
    CHECK(g.incident[asthma].size() == 2);
    CHECK(g.skipped_triples == 0);
}

TEST_CASE("graph skips triples with empty parts") {
    std::vector<PatientRecord> recs(1);
    recs[0].uid = "p1";
    recs[0].body = "note";
    recs[0].triples = {{"p1", "", "asthma"}, {"p1", "HAS", ""}, {"p1", "HAS", "asthma"}};
    const PropertyGraph g = build_graph(make_corpus(Modality::Kg, std::move(recs)));
    CHECK(g.skipped_triples == 2);
    CHECK(g.edges.size() == 1);
}

TEST_CASE("entity names are normalized, sorted, and deduplicated") {
    const Corpus c = tiny_corpus();
    const auto names = corpus_entity_names(c);
    CHECK(names == std::vector<std::string>{"albuterol", "asthma"});
}

TEST_CASE("record entities prefer triples and fall back to dictionary") {
    const Corpus c = tiny_corpus();
    const auto dict = corpus_entity_names(c);
    CHECK(record_entities(c.records[0], dict) == std::vector<std::string>{"asthma"});
    // p3 has no triples and no dictionary term in its body
    CHECK(record_entities(c.records[2], dict).empty());
    PatientRecord r;
    r.uid = "p9";
    r.body = "Asthma and albuterol mentioned.";
    CHECK(record_entities(r, dict) == std::vector<std::string>{"asthma", "albuterol"});
}

TEST_CASE("association graph adjacency is symmetric and sorted") {
    const Corpus c = tiny_corpus();
    const AssociationGraph g = build_association_graph(c);
    CHECK(g.neighbors("asthma") == std::vector<std::string>{"p1", "p2"});
    CHECK(g.neighbors("p1") == std::vector<std::string>{"asthma"});
    CHECK(g.neighbors("p2") == std::vector<std::string>{"albuterol", "asthma"});
    // isolated record still gets a node
    CHECK(g.has_node("p3"));
    CHECK(g.neighbors("p3").empty());
    CHECK(g.record_nodes == std::vector<std::string>{"p1", "p2", "p3"});
    CHECK(g.edge_count() == 3);
    CHECK(g.neighbors("unknown-node").empty());
}

TEST_CASE("index container round-trips through disk") {
    const Corpus c = tiny_corpus();
    const std::string dir =
        (std::filesystem::temp_directory_path() / "hyfed_store_test").string();
    std::filesystem::remove_all(dir);
    save_index(c, dir);
    const Corpus back = load_index(dir);
    CHECK(back.modality == Modality::Kg);
    REQUIRE(back.size() == c.size());
    for (size_t i = 0; i < c.size(); ++i) {
        CHECK(back.records[i].uid == c.records[i].uid);
        CHECK(back.records[i].body == c.records[i].body);
        CHECK(back.records[i].fields == c.records[i].fields);
        CHECK(back.records[i].triples == c.records[i].triples);
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("index load rejects bad magic and missing files") {
    const std::string dir =
        (std::filesystem::temp_directory_path() / "hyfed_store_bad").string();
    std::filesystem::remove_all(dir);
    CHECK_THROWS_AS(load_index(dir), ParseError);
    std::filesystem::create_directories(dir);
    {
        std::FILE* f = std::fopen((dir + "/index.json").c_str(), "wb");
        REQUIRE(f != nullptr);
        const std::string bogus = R"({"magic":"NOPE","version":1,"modality":"text","records":[]})";
        std::fwrite(bogus.data(), 1, bogus.size(), f);
        std::fclose(f);
    }
    CHECK(error_of([&] { load_index(dir); }).find("magic") != std::string::npos);
    std::filesystem::remove_all(dir);
}

}  // TEST_SUITE
