#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hyfed/common.hpp"
#include "hyfed/corpus.hpp"
#include "hyfed/prng.hpp"
#include "hyfed/workload.hpp"

using namespace hyfed;

namespace {

// chain r1 - e1 - r2 - e2 - r3
AssociationGraph chain_graph() {
    AssociationGraph g;
    g.adjacency["r1"] = {"e1"};
    g.adjacency["e1"] = {"r1", "r2"};
    g.adjacency["r2"] = {"e1", "e2"};
    g.adjacency["e2"] = {"r2", "r3"};
    g.adjacency["r3"] = {"e2"};
    g.record_nodes = {"r1", "r2", "r3"};
    return g;
}

AssociationGraph star_graph() {
    AssociationGraph g;
    g.adjacency["hub"] = {"r1", "r2", "r3", "r4"};
    g.adjacency["r1"] = {"hub"};
    g.adjacency["r2"] = {"hub"};
    g.adjacency["r3"] = {"hub"};
    g.adjacency["r4"] = {"hub"};
    g.record_nodes = {"r1", "r2", "r3", "r4"};
    return g;
}

std::set<std::string> two_hop(const AssociationGraph& g, const std::string& node) {
    std::set<std::string> out;
    for (const auto& e : g.neighbors(node))
        for (const auto& r : g.neighbors(e))
            if (r != node) out.insert(r);
    return out;
}

}  // namespace

TEST_SUITE("workload") {

TEST_CASE("splitmix64 matches the published sequence") {
    SplitMix64 zero(0);
    CHECK(zero.next() == 0xe220a8397b1dcdafULL);
    CHECK(zero.next() == 0x6e789e6aa1b965f4ULL);
    CHECK(zero.next() == 0x06c45d188009454fULL);
    SplitMix64 forty_two(42);
    CHECK(forty_two.next() == 0xbdd732262feb6e95ULL);
}

TEST_CASE("mix64 is the generator's output function") {
    CHECK(mix64(0x9e3779b97f4a7c15ULL) == 0xe220a8397b1dcdafULL);
    CHECK(mix64(0) == 0);
    SplitMix64 rng(7);
    SplitMix64 sibling = rng.split();
    SplitMix64 expect(SplitMix64(7).next());
    CHECK(sibling.next() == expect.next());
}

TEST_CASE("next_double stays in the unit interval") {
    SplitMix64 rng(123);
    double lo = 1.0, hi = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const double u = rng.next_double();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        lo = std::min(lo, u);
        hi = std::max(hi, u);
    }
    CHECK(lo < 0.01);
    CHECK(hi > 0.99);
}

TEST_CASE("next_below is bounded and covers small ranges") {
    SplitMix64 rng(5);
    std::set<uint64_t> seen;
    for (int i = 0; i < 1000; ++i) {
        const uint64_t v = rng.next_below(7);
        CHECK(v < 7);
        seen.insert(v);
    }
    CHECK(seen.size() == 7);
    CHECK(rng.next_below(1) == 0);
}

TEST_CASE("workload params validate") {
    CHECK_NOTHROW(WorkloadParams{}.validate());
    WorkloadParams bad;
    bad.restart_prob = 1.2;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    WorkloadParams sum;
    sum.restart_prob = 0.5;
    sum.dwell_prob = 0.4;
    sum.session_memory_prob = 0.2;
    CHECK_THROWS_AS(sum.validate(), ConfigError);
    WorkloadParams window;
    window.memory_window = 0;
    CHECK_THROWS_AS(window.validate(), ConfigError);
}

TEST_CASE("trace covers warmup plus test with ordered seq") {
    WorkloadParams params;
    params.warmup = 7;
    params.test = 13;
    const auto g = chain_graph();
    const auto trace = generate_workload(g, params);
    REQUIRE(trace.size() == 20);
    const std::set<std::string> records(g.record_nodes.begin(), g.record_nodes.end());
    for (size_t i = 0; i < trace.size(); ++i) {
        CHECK(trace[i].seq == i);
        CHECK(trace[i].is_warmup == (i < 7));
        CHECK(records.count(trace[i].node_id) == 1);
    }
}

TEST_CASE("traces are reproducible by seed") {
    const auto g = chain_graph();
    WorkloadParams params;
    params.warmup = 10;
    params.test = 90;
    const auto a = generate_workload(g, params);
    const auto b = generate_workload(g, params);
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) CHECK(a[i].node_id == b[i].node_id);

    params.seed = 43;
    const auto c = generate_workload(g, params);
    bool differs = false;
    for (size_t i = 0; i < a.size(); ++i)
        if (a[i].node_id != c[i].node_id) differs = true;
    CHECK(differs);
}

TEST_CASE("pure restarts are uniform over records") {
    const auto g = star_graph();
    WorkloadParams params;
    params.restart_prob = 1.0;
    params.dwell_prob = 0.0;
    params.session_memory_prob = 0.0;
    params.warmup = 0;
    params.test = 10000;
    const auto trace = generate_workload(g, params);
    std::map<std::string, int> counts;
    for (const auto& e : trace) ++counts[e.node_id];
    // 4 records, expect 2500 each; 5 sigma = 5*sqrt(10000*0.25*0.75) ~ 217
    for (const auto& [node, count] : counts) {
        CHECK(count > 2500 - 217);
        CHECK(count < 2500 + 217);
    }
}

TEST_CASE("pure dwell repeats the first node forever") {
    const auto g = star_graph();
    WorkloadParams params;
    params.restart_prob = 0.0;
    params.dwell_prob = 1.0;
    params.session_memory_prob = 0.0;
    params.warmup = 0;
    params.test = 50;
    const auto trace = generate_workload(g, params);
    for (const auto& e : trace) CHECK(e.node_id == trace[0].node_id);
}

TEST_CASE("session memory with a one-slot window pins the walk") {
    const auto g = star_graph();
    WorkloadParams params;
    params.restart_prob = 0.0;
    params.dwell_prob = 0.0;
    params.session_memory_prob = 1.0;
    params.memory_window = 1;
    params.warmup = 0;
    params.test = 50;
    const auto trace = generate_workload(g, params);
    for (const auto& e : trace) CHECK(e.node_id == trace[0].node_id);
}

TEST_CASE("walk steps move to records at distance two") {
    const auto g = chain_graph();
    WorkloadParams params;
    params.restart_prob = 0.0;
    params.dwell_prob = 0.0;
    params.session_memory_prob = 0.0;
    params.warmup = 0;
    params.test = 300;
    const auto trace = generate_workload(g, params);
    for (size_t i = 1; i < trace.size(); ++i) {
        const auto hops = two_hop(g, trace[i - 1].node_id);
        REQUIRE(!hops.empty());
        CHECK(hops.count(trace[i].node_id) == 1);
    }
}

TEST_CASE("isolated records degrade every step to a restart") {
    AssociationGraph g;
    g.adjacency["r1"] = {};
    g.record_nodes = {"r1"};
    WorkloadParams params;
    params.restart_prob = 0.0;
    params.dwell_prob = 0.0;
    params.session_memory_prob = 0.0;
    params.warmup = 0;
    params.test = 20;
    const auto trace = generate_workload(g, params);
    for (const auto& e : trace) CHECK(e.node_id == "r1");
}

TEST_CASE("an empty graph cannot generate a workload") {
    AssociationGraph g;
    CHECK_THROWS_AS(generate_workload(g, WorkloadParams{}), Error);
}

TEST_CASE("simulate counts only the test suffix") {
    const auto g = chain_graph();
    WorkloadParams params;
    params.warmup = 30;
    params.test = 70;
    const auto trace = generate_workload(g, params);
    std::vector<CacheOutcome> per_event;
    TierConfig cfg;
    cfg.hotspot_size = 2;
    const auto stats = simulate(trace, cfg, g, &per_event);
    CHECK(stats.total() == 70);
    CHECK(per_event.size() == trace.size());
    // record-node lookups never hit the one-hop tier: its stubs are entities
    CHECK(stats.l2_hits == 0);
    const auto again = simulate(trace, cfg, g);
    CHECK(again.l1_hits == stats.l1_hits);
    CHECK(again.l3_hits == stats.l3_hits);
    CHECK(again.misses == stats.misses);
}

TEST_CASE("generated prefix matches the stored reference") {
    const std::string dir = HYFED_FIXTURE_DIR;
    std::ifstream corpus_in(dir + "/corpus.jsonl");
    REQUIRE(corpus_in.good());
    std::string content((std::istreambuf_iterator<char>(corpus_in)),
                        std::istreambuf_iterator<char>());
    const Corpus corpus = ingest_corpus_text(content, Modality::Text);
    const auto assoc = build_association_graph(corpus);

    std::ifstream ref_in(dir + "/derived/workload_prefix.json");
    REQUIRE(ref_in.good());
    const auto ref = nlohmann::json::parse(ref_in);

    WorkloadParams params;
    params.seed = ref.at("seed").get<uint64_t>();
    params.warmup = ref.at("warmup").get<size_t>();
    params.test = ref.at("test").get<size_t>();
    const auto trace = generate_workload(assoc, params);
    const auto first = ref.at("first_nodes");
    REQUIRE(trace.size() >= first.size());
    for (size_t i = 0; i < first.size(); ++i)
        CHECK(trace[i].node_id == first[i].get<std::string>());
}

}  // TEST_SUITE
