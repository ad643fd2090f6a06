#include "hyfed/workload.hpp"

#include <algorithm>
#include <set>

#include "hyfed/common.hpp"
#include "hyfed/prng.hpp"

namespace hyfed {

void WorkloadParams::validate() const {
    auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
    if (!prob(restart_prob) || !prob(dwell_prob) || !prob(session_memory_prob))
        throw ConfigError("workload probabilities must be in [0,1]");
    if (restart_prob + dwell_prob + session_memory_prob > 1.0)
        throw ConfigError("workload probabilities must sum to <= 1");
    if (memory_window < 1) throw ConfigError("workload memory window must be >= 1");
}

namespace {

// Records at exactly distance 2 (record -> entity -> record), sorted.
std::vector<std::string> two_hop_records(const AssociationGraph& assoc,
                                         const std::string& node) {
    std::set<std::string> out;
    for (const auto& entity : assoc.neighbors(node))
        for (const auto& rec : assoc.neighbors(entity))
            if (rec != node) out.insert(rec);
    return {out.begin(), out.end()};
}

}  // namespace

std::vector<QueryEvent> generate_workload(const AssociationGraph& assoc,
                                          const WorkloadParams& params) {
    params.validate();
    const auto& records = assoc.record_nodes;
    if (records.empty()) throw Error("association graph has no record nodes");

    SplitMix64 rng(params.seed);
    std::vector<std::string> ring;  // last memory_window visited nodes
    size_t ring_next = 0;
    std::string current;

    const size_t total = params.warmup + params.test;
    std::vector<QueryEvent> trace;
    trace.reserve(total);

    auto restart = [&]() -> std::string {
        return records[static_cast<size_t>(rng.next_below(records.size()))];
    };

    for (size_t i = 0; i < total; ++i) {
        const double u = rng.next_double();
        std::string node;
        if (current.empty()) {
            node = restart();
        } else if (u < params.restart_prob) {
            node = restart();
        } else if (u < params.restart_prob + params.dwell_prob) {
            node = current;
        } else if (u < params.restart_prob + params.dwell_prob + params.session_memory_prob) {
            if (ring.empty())
                node = restart();
            else
                node = ring[static_cast<size_t>(rng.next_below(ring.size()))];
        } else {
            const auto hops = two_hop_records(assoc, current);
            if (hops.empty())
                node = restart();
            else
                node = hops[static_cast<size_t>(rng.next_below(hops.size()))];
        }

        trace.push_back({node, i < params.warmup, i});
        if (ring.size() < params.memory_window) {
            ring.push_back(node);
        } else {
            ring[ring_next] = node;
            ring_next = (ring_next + 1) % params.memory_window;
        }
        current = std::move(node);
    }
    return trace;
}

CacheStats simulate(const std::vector<QueryEvent>& trace, const TierConfig& cfg,
                    const AssociationGraph& assoc, std::vector<CacheOutcome>* per_event) {
    TieredCache cache(cfg);
    cache.init_hotspots(assoc, cfg.hotspot_size);
    if (per_event) {
        per_event->clear();
        per_event->reserve(trace.size());
    }
    for (const auto& event : trace) {
        cache.set_warmup(event.is_warmup);
        const CacheKey key = CacheKey::from_node(event.node_id);
        const auto result = cache.lookup(key);
        if (result.outcome == CacheOutcome::Miss)
            cache.admit(key, "", event.node_id, &assoc);
        if (per_event) per_event->push_back(result.outcome);
    }
    return cache.stats();
}

}  // namespace hyfed
