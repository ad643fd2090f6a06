#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hyfed/cache.hpp"
#include "hyfed/corpus.hpp"

namespace hyfed {

struct WorkloadParams {
    double restart_prob = 0.15;
    double dwell_prob = 0.20;
    double session_memory_prob = 0.15;
    size_t memory_window = 10;
    size_t warmup = 100;
    size_t test = 500;
    uint64_t seed = 42;

    void validate() const;
};

struct QueryEvent {
    std::string node_id;  // always a record (uid) node
    bool is_warmup = false;
    size_t seq = 0;
};

// Random walk with restart, dwell, and session memory over the record nodes
// of the association graph. The walk step moves to a uniformly random record
// at exactly graph distance 2 (record -> entity -> record); when no such
// record exists the step degrades to a restart, as do dwell/memory steps
// before any node has been visited.
std::vector<QueryEvent> generate_workload(const AssociationGraph& assoc,
                                          const WorkloadParams& params);

// Replays the trace against a fresh cache (hotspots pre-seeded from the
// association graph, admit on miss, prefetch on admit). Stats cover only
// the non-warmup suffix; per_event receives one outcome per trace event
// when non-null.
CacheStats simulate(const std::vector<QueryEvent>& trace, const TierConfig& cfg,
                    const AssociationGraph& assoc,
                    std::vector<CacheOutcome>* per_event = nullptr);

}  // namespace hyfed
