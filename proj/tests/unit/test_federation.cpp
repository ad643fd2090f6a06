#include <doctest.h>

#include <atomic>
#include <chrono>
#include <memory>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "hyfed/common.hpp"
#include "hyfed/corpus.hpp"
#include "hyfed/federation.hpp"
#include "hyfed/models.hpp"

using namespace hyfed;

namespace {

bool contains(const std::string& hay, const std::string& needle) {
    return hay.find(needle) != std::string::npos;
}

bool is_hex64(const std::string& s) {
    if (s.size() != 64) return false;
    for (char c : s)
        if (!std::isxdigit(static_cast<unsigned char>(c))) return false;
    return true;
}

Query wheeze_query() {
    Query q;
    q.title = "wheeze";
    q.abstract_text = "recurrent wheeze and cough";
    return q;
}

Corpus text_corpus() {
    std::vector<PatientRecord> recs(3);
    recs[0].uid = "PT-0101";
    recs[0].title = "Asthma follow up";
    recs[0].body = "Evelyn Marsh reports wheeze and cough today";
    recs[1].uid = "PT-0102";
    recs[1].title = "Diabetes review";
    recs[1].body = "Daniel Okafor reviews insulin dosing schedule";
    recs[2].uid = "PT-0103";
    recs[2].title = "Migraine consult";
    recs[2].body = "Recurrent migraine with aura, triptan prescribed";
    return make_corpus(Modality::Text, std::move(recs));
}

Corpus sql_corpus() {
    std::vector<PatientRecord> recs(3);
    recs[0].uid = "PT-0201";
    recs[0].title = "Pulmonary visit";
    recs[0].body = "Wheeze and cough documented.";
    recs[0].fields = {{"site", "north"}, {"status", "open"}};
    recs[1].uid = "PT-0202";
    recs[1].title = "Cardiology visit";
    recs[1].body = "Palpitations reported.";
    recs[1].fields = {{"site", "south"}};
    recs[2].uid = "PT-0203";
    recs[2].title = "Dermatology visit";
    recs[2].body = "Rash cleared.";
    recs[2].fields = {{"site", "north"}};
    return make_corpus(Modality::Sql, std::move(recs));
}

Corpus kg_corpus() {
    std::vector<PatientRecord> recs(3);
    recs[0].uid = "PT-0301";
    recs[0].title = "Asthma case";
    recs[0].body = "Baseline wheeze noted";
    recs[0].triples = {{"PT-0301", "HAS_SYMPTOM", "wheeze"}, {"PT-0301", "HAS_SYMPTOM", "cough"}};
    recs[1].uid = "PT-0302";
    recs[1].title = "Bronchitis case";
    recs[1].body = "Productive cough noted";
    recs[1].triples = {{"PT-0302", "HAS_SYMPTOM", "cough"}};
    recs[2].uid = "PT-0303";
    recs[2].title = "Gout case";
    recs[2].body = "Joint pain noted";
    recs[2].triples = {{"PT-0303", "HAS_DISEASE", "gout"}};
    return make_corpus(Modality::Kg, std::move(recs));
}

ClientParams base_params(const std::string& id, Modality modality) {
    ClientParams p;
    p.client_id = id;
    p.modality = modality;
    p.privacy.person_lexicon = {"Evelyn Marsh", "Daniel Okafor"};
    p.privacy.client_key = "key-" + id;
    return p;
}

ModelSet reference_models() {
    ModelSet m;
    m.embedder = std::make_shared<HashingEmbedder>(64);
    m.reranker = std::make_shared<JaccardReranker>();
    return m;
}

std::unique_ptr<FederatedClient> text_client(const std::string& id) {
    return std::make_unique<FederatedClient>(base_params(id, Modality::Text), text_corpus(),
                                             reference_models());
}

std::unique_ptr<FederatedClient> sql_client(const std::string& id) {
    return std::make_unique<FederatedClient>(base_params(id, Modality::Sql), sql_corpus(),
                                             reference_models());
}

std::unique_ptr<FederatedClient> kg_client(const std::string& id) {
    return std::make_unique<FederatedClient>(base_params(id, Modality::Kg), kg_corpus(),
                                             reference_models());
}

ResultEntry entry(const std::string& uid_hash, double score, const std::string& summary) {
    ResultEntry e;
    e.uid_hash = uid_hash;
    e.score = score;
    e.summary_text = summary;
    return e;
}

ClientResponse response(const std::string& id, const std::string& modality,
                        std::vector<ResultEntry> results) {
    ClientResponse r;
    r.client_id = id;
    r.modality = modality;
    r.results = std::move(results);
    return r;
}

std::string register_line(const std::string& client_id, const std::string& modality) {
    Envelope env;
    env.type = MsgType::Register;
    env.query_id = "register-" + client_id;
    env.payload["client_id"] = client_id;
    env.payload["modality"] = modality;
    return encode(env);
}

struct ThrowingLink : ClientLink {
    std::string transact(const std::string&) override { throw Error("link down"); }
};

struct ErrorLink : ClientLink {
    std::string transact(const std::string& line) override {
        const Envelope request = decode_line(line);
        Envelope env;
        env.type = MsgType::Error;
        env.query_id = request.query_id;
        env.payload["message"] = "backend melted";
        return encode(env);
    }
};

// Replies in someone else's name; the server must reject the response.
struct ImposterLink : ClientLink {
    std::string transact(const std::string& line) override {
        const Envelope request = decode_line(line);
        Envelope env;
        env.type = MsgType::RetrieveResponse;
        env.query_id = request.query_id;
        env.payload["client_id"] = "someone-else";
        env.payload["modality"] = "text";
        env.payload["results"] = nlohmann::ordered_json::array();
        return encode(env);
    }
};

struct CountingEmbedder : Embedder {
    HashingEmbedder inner{64};
    mutable std::atomic<int> calls{0};
    size_t dim() const override { return inner.dim(); }
    std::vector<float> embed(std::string_view text) const override {
        ++calls;
        return inner.embed(text);
    }
};

struct DownReranker : Reranker {
    double score(std::string_view, std::string_view) const override {
        throw BackendError("model service http://127.0.0.1:9/model unreachable: probe refused");
    }
};

struct LeakyReranker : Reranker {
    double score(std::string_view, std::string_view) const override {
        throw std::runtime_error("raw body: Evelyn Marsh PT-0101 wheeze");
    }
};

void wait_for_roster(const FederationServer& server, size_t n) {
    for (int i = 0; i < 500; ++i) {
        if (server.roster_size() >= n) return;
        std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
    FAIL("roster never reached " << n << " clients");
}

}  // namespace

TEST_SUITE_BEGIN("federation");

TEST_CASE("register envelopes carry the client identity") {
    auto alpha = text_client("alpha");
    CHECK(alpha->client_id() == "alpha");
    CHECK(alpha->modality() == Modality::Text);

    const Envelope env = alpha->make_register();
    CHECK(env.type == MsgType::Register);
    CHECK(env.query_id == "register-alpha");
    CHECK(env.payload.at("client_id") == "alpha");
    CHECK(env.payload.at("modality") == "text");
}

TEST_CASE("clients need an embedder and a reranker") {
    ModelSet no_embedder;
    no_embedder.reranker = std::make_shared<JaccardReranker>();
    CHECK_THROWS_AS(
        FederatedClient(base_params("a", Modality::Text), text_corpus(), no_embedder),
        ConfigError);

    ModelSet no_reranker;
    no_reranker.embedder = std::make_shared<HashingEmbedder>(64);
    CHECK_THROWS_AS(
        FederatedClient(base_params("a", Modality::Text), text_corpus(), no_reranker),
        ConfigError);
}

TEST_CASE("retrieve requests produce masked summaries") {
    auto alpha = text_client("alpha");
    const Envelope reply = alpha->handle(make_retrieve_request(wheeze_query(), 2, "q-1"));
    REQUIRE(reply.type == MsgType::RetrieveResponse);
    CHECK(reply.query_id == "q-1");

    const ClientResponse resp = parse_response(reply);
    CHECK(resp.client_id == "alpha");
    CHECK(resp.modality == "text");
    REQUIRE(!resp.results.empty());
    CHECK(resp.results.size() <= 2);
    for (size_t i = 0; i + 1 < resp.results.size(); ++i)
        CHECK(resp.results[i].score >= resp.results[i + 1].score);
    for (const auto& r : resp.results) {
        CHECK(is_hex64(r.uid_hash));
        CHECK(!r.summary_text.empty());
    }
    CHECK(resp.results.front().signals.count("cos_tfidf") == 1);
    CHECK(resp.results.front().signals.count("reranker") == 1);

    // The only wheeze+cough record wins, with its name masked.
    CHECK(contains(resp.results.front().summary_text, "wheeze"));
    CHECK(contains(resp.results.front().summary_text, "<PERSON_1>"));

    const std::string dump = reply.payload.dump();
    CHECK(!contains(dump, "PT-01"));
    CHECK(!contains(dump, "Evelyn"));
    CHECK(!contains(dump, "Marsh"));
    CHECK(!contains(dump, "Okafor"));
}

TEST_CASE("kg and sql clients answer through the same envelope") {
    auto beta = sql_client("beta");
    const Envelope sql_reply = beta->handle(make_retrieve_request(wheeze_query(), 3, "q-sql"));
    REQUIRE(sql_reply.type == MsgType::RetrieveResponse);
    const ClientResponse sql_resp = parse_response(sql_reply);
    CHECK(sql_resp.modality == "sql");
    REQUIRE(!sql_resp.results.empty());
    CHECK(sql_resp.results.front().signals.count("exact") == 1);
    CHECK(sql_resp.results.front().signals.count("s_combined") == 1);
    CHECK(is_hex64(sql_resp.results.front().uid_hash));
    CHECK(!contains(sql_reply.payload.dump(), "PT-02"));

    auto gamma = kg_client("gamma");
    const Envelope kg_reply = gamma->handle(make_retrieve_request(wheeze_query(), 3, "q-kg"));
    REQUIRE(kg_reply.type == MsgType::RetrieveResponse);
    const ClientResponse kg_resp = parse_response(kg_reply);
    CHECK(kg_resp.modality == "kg");
    REQUIRE(!kg_resp.results.empty());
    CHECK(kg_resp.results.front().signals.count("s_final") == 1);
    // Statement views carry the patient uid; it must leave masked.
    CHECK(contains(kg_resp.results.front().summary_text, "wheeze"));
    CHECK(contains(kg_resp.results.front().summary_text, "<ID_"));
    CHECK(!contains(kg_reply.payload.dump(), "PT-03"));
}

TEST_CASE("wrong envelope types and bad parameters are refused") {
    auto alpha = text_client("alpha");

    Envelope ack;
    ack.type = MsgType::Ack;
    ack.query_id = "q-x";
    const Envelope wrong = alpha->handle(ack);
    REQUIRE(wrong.type == MsgType::Error);
    CHECK(wrong.query_id == "q-x");
    CHECK(wrong.payload.at("message") == "client expects RetrieveRequest, got Ack");

    Query empty;
    const Envelope no_query = alpha->handle(make_retrieve_request(empty, 2, "q-y"));
    REQUIRE(no_query.type == MsgType::Error);
    CHECK(no_query.payload.at("message") == "empty query");

    const Envelope no_k = alpha->handle(make_retrieve_request(wheeze_query(), 0, "q-z"));
    REQUIRE(no_k.type == MsgType::Error);
    CHECK(no_k.payload.at("message") == "top_k must be >= 1");
}

TEST_CASE("backend failures surface without leaking record content") {
    ModelSet down;
    down.embedder = std::make_shared<HashingEmbedder>(64);
    down.reranker = std::make_shared<DownReranker>();
    FederatedClient broken(base_params("alpha-down", Modality::Text), text_corpus(),
                           std::move(down));
    const Envelope down_reply = broken.handle(make_retrieve_request(wheeze_query(), 2, "q-1"));
    REQUIRE(down_reply.type == MsgType::Error);
    CHECK(down_reply.payload.at("message") ==
          "model service http://127.0.0.1:9/model unreachable: probe refused");

    ModelSet leaky;
    leaky.embedder = std::make_shared<HashingEmbedder>(64);
    leaky.reranker = std::make_shared<LeakyReranker>();
    FederatedClient guarded(base_params("alpha-leak", Modality::Text), text_corpus(),
                            std::move(leaky));
    const Envelope leak_reply = guarded.handle(make_retrieve_request(wheeze_query(), 2, "q-2"));
    REQUIRE(leak_reply.type == MsgType::Error);
    const std::string message = leak_reply.payload.at("message").get<std::string>();
    CHECK(message == "internal retrieval error on client alpha-leak");
    CHECK(!contains(message, "Evelyn"));
    CHECK(!contains(message, "PT-0101"));
}

TEST_CASE("repeat queries come from the response cache") {
    auto embedder = std::make_shared<CountingEmbedder>();
    ModelSet models;
    models.embedder = embedder;
    models.reranker = std::make_shared<JaccardReranker>();
    FederatedClient alpha(base_params("alpha", Modality::Text), text_corpus(), std::move(models));

    const int after_build = embedder->calls;
    const Envelope first = alpha.handle(make_retrieve_request(wheeze_query(), 2, "q-1"));
    REQUIRE(first.type == MsgType::RetrieveResponse);
    const int after_first = embedder->calls;
    CHECK(after_first > after_build);

    const Envelope second = alpha.handle(make_retrieve_request(wheeze_query(), 2, "q-2"));
    REQUIRE(second.type == MsgType::RetrieveResponse);
    CHECK(embedder->calls == after_first);
    CHECK(second.query_id == "q-2");
    CHECK(second.payload == first.payload);

    // Post-hoc alpha overrides do not change the response key.
    const Envelope third = alpha.handle(make_retrieve_request(wheeze_query(), 2, "q-3", 0.0));
    CHECK(embedder->calls == after_first);
    CHECK(third.payload == first.payload);

    const Envelope narrower = alpha.handle(make_retrieve_request(wheeze_query(), 1, "q-4"));
    REQUIRE(narrower.type == MsgType::RetrieveResponse);
    CHECK(embedder->calls > after_first);
    CHECK(narrower.payload.at("results").size() == 1);
}

TEST_CASE("aggregate normalizes per client before fusing") {
    const std::vector<ClientResponse> responses = {
        response("c2", "sql", {entry("h-b1", 0.5, "s-b1"), entry("h-b2", 0.5, "s-b2")}),
        response("c1", "text", {entry("h-a1", 0.9, "s-a1"), entry("h-a2", 0.1, "s-a2")}),
    };
    const GlobalReport report = aggregate(responses, {}, 3);

    REQUIRE(report.sections.size() == 2);
    CHECK(report.sections[0].client_id == "c1");
    CHECK(report.sections[1].client_id == "c2");
    CHECK(!report.sections[0].failed);
    CHECK(report.sections[0].results[0].score == doctest::Approx(0.9));
    CHECK(report.sections[0].results[1].score == doctest::Approx(0.1));

    // c1 spans min-max to {1, 0}; c2 is constant so both entries pin to 1.
    REQUIRE(report.fused.size() == 3);
    for (const auto& f : report.fused) CHECK(f.fused_score == 1.0);
    CHECK(report.fused[0].client_id == "c1");
    CHECK(report.fused[0].uid_hash == "h-a1");
    CHECK(report.fused[1].client_id == "c2");
    CHECK(report.fused[1].uid_hash == "h-b1");
    CHECK(report.fused[2].client_id == "c2");
    CHECK(report.fused[2].uid_hash == "h-b2");

    CHECK(report.generation == "[c1] s-a1\n[c2] s-b1\n[c2] s-b2\n");
}

TEST_CASE("fused lists respect the global budget and generator hooks") {
    const std::vector<ClientResponse> responses = {
        response("c1", "text", {entry("h-a1", 0.9, "s-a1"), entry("h-a2", 0.1, "s-a2")}),
        response("c2", "sql", {entry("h-b1", 0.5, "s-b1"), entry("h-b2", 0.5, "s-b2")}),
    };
    const GlobalReport capped = aggregate(responses, {}, 2);
    REQUIRE(capped.fused.size() == 2);
    CHECK(capped.fused[0].uid_hash == "h-a1");
    CHECK(capped.fused[1].uid_hash == "h-b1");

    const GlobalReport custom = aggregate(responses, {}, 2, [](const std::vector<FusedEntry>& f) {
        return "fused=" + std::to_string(f.size());
    });
    CHECK(custom.generation == "fused=2");
}

TEST_CASE("aggregate marks failures and keeps going") {
    const std::vector<ClientResponse> responses = {
        response("c1", "text", {entry("h-a1", 0.9, "s-a1"), entry("h-a2", 0.1, "s-a2")}),
    };
    const std::vector<FailedClient> failures = {{"c0", "link down"}};
    const GlobalReport report = aggregate(responses, failures, 5);

    REQUIRE(report.sections.size() == 2);
    CHECK(report.sections[0].client_id == "c0");
    CHECK(report.sections[0].failed);
    CHECK(report.sections[0].error == "link down");
    CHECK(report.sections[0].results.empty());
    CHECK(report.sections[1].client_id == "c1");
    CHECK(!report.sections[1].failed);

    REQUIRE(report.fused.size() == 2);
    CHECK(report.fused[0].uid_hash == "h-a1");
    CHECK(report.fused[0].fused_score == 1.0);
    CHECK(report.fused[1].uid_hash == "h-a2");
    CHECK(report.fused[1].fused_score == 0.0);
}

TEST_CASE("aggregate without successful clients refuses") {
    CHECK_THROWS_WITH_AS(aggregate({}, {}, 5), "no clients responded", Error);
    const std::vector<FailedClient> failures = {{"c0", "link down"}};
    CHECK_THROWS_WITH_AS(aggregate({}, failures, 5), "no clients responded", Error);
}

TEST_CASE("global reports survive a json round trip") {
    ResultEntry scored = entry("h-a1", 0.9, "s-a1");
    scored.signals["cos_tfidf"] = 0.75;
    scored.signals["reranker"] = 0.5;
    const std::vector<ClientResponse> responses = {
        response("c1", "text", {scored, entry("h-a2", 0.1, "s-a2")}),
    };
    const std::vector<FailedClient> failures = {{"c0", "link down"}};
    GlobalReport report = aggregate(responses, failures, 5);
    report.query_id = "q-rt";

    const nlohmann::ordered_json j = report.to_json();
    const GlobalReport back = GlobalReport::from_json(j);
    CHECK(back.to_json() == j);
    CHECK(back.query_id == "q-rt");
    REQUIRE(back.sections.size() == 2);
    CHECK(back.sections[0].failed);
    CHECK(back.sections[1].results[0].signals.at("cos_tfidf") == doctest::Approx(0.75));
    REQUIRE(back.fused.size() == 2);
    CHECK(back.fused[0].fused_score == 1.0);
    CHECK(back.generation == report.generation);

    nlohmann::ordered_json broken = j;
    broken.erase("fused");
    CHECK_THROWS_AS(GlobalReport::from_json(broken), WireError);
}

TEST_CASE("parse_response rejects other envelope types") {
    Envelope ack;
    ack.type = MsgType::Ack;
    ack.query_id = "q-1";
    CHECK_THROWS_WITH_AS(parse_response(ack), "expected RetrieveResponse, got Ack", WireError);

    Envelope partial;
    partial.type = MsgType::RetrieveResponse;
    partial.query_id = "q-1";
    partial.payload["client_id"] = "c1";
    try {
        parse_response(partial);
        FAIL("expected WireError for a payload with missing fields");
    } catch (const WireError& e) {
        CHECK(contains(e.what(), "malformed RetrieveResponse payload"));
    }
}

TEST_CASE("retrieve request envelopes carry overrides only when set") {
    const Envelope plain = make_retrieve_request(wheeze_query(), 5, "q-1");
    CHECK(plain.type == MsgType::RetrieveRequest);
    CHECK(plain.payload.at("title") == "wheeze");
    CHECK(plain.payload.at("abstract") == "recurrent wheeze and cough");
    CHECK(plain.payload.at("top_k") == 5);
    CHECK(!plain.payload.contains("alpha"));
    CHECK(!plain.payload.contains("tau"));

    const Envelope tuned = make_retrieve_request(wheeze_query(), 5, "q-2", 0.25, 0.8);
    CHECK(tuned.payload.at("alpha") == doctest::Approx(0.25));
    CHECK(tuned.payload.at("tau") == doctest::Approx(0.8));
}

TEST_CASE("server registration guards the roster") {
    FederationServer server({4, 1000});
    CHECK(server.roster_size() == 0);

    const std::string ack_line =
        server.handle_register(register_line("alpha", "text"), std::make_shared<ThrowingLink>());
    const Envelope ack = decode_line(ack_line);
    REQUIRE(ack.type == MsgType::Ack);
    CHECK(ack.payload.at("client_id") == "alpha");
    CHECK(ack.payload.at("modality") == "text");
    CHECK(server.roster_size() == 1);

    const Envelope dup = decode_line(
        server.handle_register(register_line("alpha", "sql"), std::make_shared<ThrowingLink>()));
    REQUIRE(dup.type == MsgType::Error);
    CHECK(dup.payload.at("message") == "duplicate client_id: alpha");
    CHECK(server.roster_size() == 1);

    const Envelope anon = decode_line(
        server.handle_register(register_line("", "text"), std::make_shared<ThrowingLink>()));
    REQUIRE(anon.type == MsgType::Error);
    CHECK(anon.payload.at("message") == "client_id must be non-empty");

    const Envelope odd = decode_line(
        server.handle_register(register_line("b", "carrier-pigeon"), std::make_shared<ThrowingLink>()));
    REQUIRE(odd.type == MsgType::Error);
    CHECK(contains(odd.payload.at("message").get<std::string>(), "bad Register payload"));

    const Envelope wrong_type = decode_line(server.handle_register(
        encode(make_retrieve_request(wheeze_query(), 1, "q-1")), std::make_shared<ThrowingLink>()));
    REQUIRE(wrong_type.type == MsgType::Error);
    CHECK(wrong_type.payload.at("message") == "expected Register, got RetrieveRequest");

    const Envelope garbage =
        decode_line(server.handle_register("not json\n", std::make_shared<ThrowingLink>()));
    REQUIRE(garbage.type == MsgType::Error);
    CHECK(contains(garbage.payload.at("message").get<std::string>(), "malformed envelope"));

    CHECK(server.roster() == std::vector<std::string>{"alpha"});
}

TEST_CASE("queries against an empty roster fail cleanly") {
    FederationServer server({4, 1000});
    CHECK_THROWS_WITH_AS(server.run_query(wheeze_query(), 2, "q-1"), "no clients responded",
                         Error);

    const Envelope reply =
        decode_line(server.handle_query_line(encode(make_retrieve_request(wheeze_query(), 2, "q-1"))));
    REQUIRE(reply.type == MsgType::Error);
    CHECK(reply.payload.at("message") == "no clients responded");

    const Envelope wrong_type =
        decode_line(server.handle_query_line(register_line("alpha", "text")));
    REQUIRE(wrong_type.type == MsgType::Error);
    CHECK(wrong_type.payload.at("message") == "expected RetrieveRequest, got Register");

    const Envelope no_k =
        decode_line(server.handle_query_line(encode(make_retrieve_request(wheeze_query(), 0, "q-2"))));
    REQUIRE(no_k.type == MsgType::Error);
    CHECK(no_k.payload.at("message") == "top_k must be >= 1");
}

TEST_CASE("in-process federation masks the transcript") {
    auto transcript = std::make_shared<TranscriptSink>();
    FederationServer server({4, 1000});
    auto alpha = text_client("alpha");
    auto beta = sql_client("beta");
    auto gamma = kg_client("gamma");

    const Envelope ack = connect_local(server, *alpha, transcript);
    CHECK(ack.type == MsgType::Ack);
    CHECK(ack.payload.at("client_id") == "alpha");
    connect_local(server, *beta, transcript);
    connect_local(server, *gamma, transcript);
    CHECK(server.roster() == std::vector<std::string>{"alpha", "beta", "gamma"});

    auto second_alpha = text_client("alpha");
    CHECK_THROWS_WITH_AS(connect_local(server, *second_alpha, transcript),
                         "registration rejected: duplicate client_id: alpha", Error);
    CHECK(server.roster_size() == 3);

    const GlobalReport report = server.run_query(wheeze_query(), 3, "q-77");
    CHECK(report.query_id == "q-77");
    REQUIRE(report.sections.size() == 3);
    CHECK(report.sections[0].client_id == "alpha");
    CHECK(report.sections[0].modality == "text");
    CHECK(report.sections[1].client_id == "beta");
    CHECK(report.sections[1].modality == "sql");
    CHECK(report.sections[2].client_id == "gamma");
    CHECK(report.sections[2].modality == "kg");
    for (const auto& s : report.sections) {
        CHECK(!s.failed);
        for (const auto& r : s.results) CHECK(is_hex64(r.uid_hash));
    }
    REQUIRE(!report.fused.empty());
    CHECK(report.fused.size() <= 4);
    for (size_t i = 0; i + 1 < report.fused.size(); ++i)
        CHECK(report.fused[i].fused_score >= report.fused[i + 1].fused_score);
    CHECK(!report.generation.empty());

    const std::string report_dump = report.to_json().dump();
    CHECK(!contains(report_dump, "PT-0"));
    CHECK(!contains(report_dump, "Evelyn"));
    CHECK(!contains(report_dump, "Marsh"));
    CHECK(!contains(report_dump, "Okafor"));
    CHECK(contains(report_dump, "<PERSON_1>"));

    // A repeat run is answered from the client caches, byte for byte.
    const GlobalReport again = server.run_query(wheeze_query(), 3, "q-78");
    nlohmann::ordered_json lhs = report.to_json();
    nlohmann::ordered_json rhs = again.to_json();
    lhs.erase("query_id");
    rhs.erase("query_id");
    CHECK(lhs == rhs);

    const std::string wire = transcript->bytes();
    CHECK(!wire.empty());
    CHECK(contains(wire, "\"Register\""));
    CHECK(contains(wire, "\"RetrieveRequest\""));
    CHECK(contains(wire, "\"RetrieveResponse\""));
    CHECK(!contains(wire, "PT-0"));
    CHECK(!contains(wire, "Evelyn"));
    CHECK(!contains(wire, "Marsh"));
    CHECK(!contains(wire, "Okafor"));
    CHECK(!contains(wire, "\"body\""));
    CHECK(!contains(wire, "\"fields\""));
    CHECK(!contains(wire, "\"triples\""));
}

TEST_CASE("faulty links are isolated from the rest of the query") {
    FederationServer server({6, 1000});
    auto alpha = text_client("alpha");
    connect_local(server, *alpha, nullptr);
    server.handle_register(register_line("broken", "text"), std::make_shared<ThrowingLink>());
    server.handle_register(register_line("erring", "sql"), std::make_shared<ErrorLink>());
    server.handle_register(register_line("liar", "kg"), std::make_shared<ImposterLink>());
    CHECK(server.roster_size() == 4);

    const GlobalReport report = server.run_query(wheeze_query(), 2, "q-9");
    REQUIRE(report.sections.size() == 4);
    CHECK(report.sections[0].client_id == "alpha");
    CHECK(!report.sections[0].failed);
    CHECK(report.sections[1].client_id == "broken");
    CHECK(report.sections[1].failed);
    CHECK(report.sections[1].error == "link down");
    CHECK(report.sections[2].client_id == "erring");
    CHECK(report.sections[2].failed);
    CHECK(report.sections[2].error == "backend melted");
    CHECK(report.sections[3].client_id == "liar");
    CHECK(report.sections[3].failed);
    CHECK(report.sections[3].error == "response client_id mismatch");

    REQUIRE(!report.fused.empty());
    for (const auto& f : report.fused) CHECK(f.client_id == "alpha");
}

TEST_CASE("handle_query_line answers with an ack carrying the report") {
    FederationServer server({4, 1000});
    auto alpha = text_client("alpha");
    auto beta = sql_client("beta");
    connect_local(server, *alpha, nullptr);
    connect_local(server, *beta, nullptr);

    const std::string reply_line =
        server.handle_query_line(encode(make_retrieve_request(wheeze_query(), 2, "q-ack")));
    const Envelope reply = decode_line(reply_line);
    REQUIRE(reply.type == MsgType::Ack);
    CHECK(reply.query_id == "q-ack");

    const GlobalReport report = GlobalReport::from_json(reply.payload);
    CHECK(report.query_id == "q-ack");
    REQUIRE(report.sections.size() == 2);
    CHECK(!report.fused.empty());
    CHECK(report.fused.size() <= 4);
}

TEST_CASE("tcp federation round trip") {
    auto alpha = text_client("alpha");
    auto beta = sql_client("beta");
    std::thread alpha_loop;
    std::thread beta_loop;
    std::string alpha_error;
    std::string beta_error;
    {
        FederationServer core({5, 30000});
        TcpServer tcp(core, "127.0.0.1", 0);
        tcp.start();
        const int port = tcp.port();
        REQUIRE(port > 0);

        try {
            query_server("127.0.0.1", port, wheeze_query(), 3, "q-none", 2000);
            FAIL("expected the empty-roster query to fail");
        } catch (const Error& e) {
            CHECK(contains(e.what(), "no clients responded"));
        }

        alpha_loop = std::thread([&] {
            try {
                run_client_loop(*alpha, "127.0.0.1", port, 5000);
            } catch (const std::exception& e) {
                alpha_error = e.what();
            }
        });
        beta_loop = std::thread([&] {
            try {
                run_client_loop(*beta, "127.0.0.1", port, 5000);
            } catch (const std::exception& e) {
                beta_error = e.what();
            }
        });
        wait_for_roster(core, 2);

        auto imposter = text_client("alpha");
        try {
            run_client_loop(*imposter, "127.0.0.1", port, 5000);
            FAIL("expected the duplicate registration to be rejected");
        } catch (const Error& e) {
            CHECK(contains(e.what(), "duplicate client_id: alpha"));
        }
        CHECK(core.roster_size() == 2);

        const GlobalReport report =
            query_server("127.0.0.1", port, wheeze_query(), 3, "q-tcp", 5000);
        CHECK(report.query_id == "q-tcp");
        REQUIRE(report.sections.size() == 2);
        CHECK(report.sections[0].client_id == "alpha");
        CHECK(report.sections[1].client_id == "beta");
        CHECK(!report.sections[0].failed);
        CHECK(!report.sections[1].failed);
        REQUIRE(!report.fused.empty());
        CHECK(report.fused.size() <= 5);
        CHECK(!contains(report.to_json().dump(), "PT-0"));

        tcp.stop();
    }
    // Destroying the server drops the socket links; the loops see EOF.
    alpha_loop.join();
    beta_loop.join();
    CHECK(alpha_error.empty());
    CHECK(beta_error.empty());
}

TEST_SUITE_END();
