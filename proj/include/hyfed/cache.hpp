#pragma once

#include <cstdint>
#include <list>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hyfed/corpus.hpp"

namespace hyfed {

// Keys hash the normalized query (tokenize + space-join) so whitespace and
// case variants of one query collide intentionally. Node keys give the
// prefetcher and simulator a key space derived from association-graph nodes.
struct CacheKey {
    uint64_t fingerprint = 0;

    static CacheKey from_query(std::string_view query_text, Modality modality, size_t top_k);
    static CacheKey from_node(std::string_view node_id);

    bool operator<(const CacheKey& o) const { return fingerprint < o.fingerprint; }
    bool operator==(const CacheKey& o) const { return fingerprint == o.fingerprint; }
};

struct TierConfig {
    size_t l1_capacity = 64;
    size_t l2_capacity = 256;
    size_t l3_capacity = 512;
    size_t hotspot_size = 32;
    double l1_ms = 1.0;
    double l2_ms = 5.0;
    double l3_ms = 20.0;
    double miss_ms = 200.0;

    void validate() const;  // capacities >= 1, costs >= 0 and monotone
};

enum class CacheOutcome { L1Hit, L2Hit, L3Hit, Miss };

const char* outcome_name(CacheOutcome o);

struct CacheStats {
    uint64_t l1_hits = 0;
    uint64_t l2_hits = 0;
    uint64_t l3_hits = 0;
    uint64_t misses = 0;

    uint64_t total() const { return l1_hits + l2_hits + l3_hits + misses; }
    double rate(uint64_t part) const;
    double hit_rate() const { return rate(l1_hits + l2_hits + l3_hits); }
    double mean_latency_ms(const TierConfig& cfg) const;
    // (baseline - mean) / baseline with baseline = miss cost
    double latency_reduction(const TierConfig& cfg) const;
};

struct LookupResult {
    CacheOutcome outcome = CacheOutcome::Miss;
    std::optional<std::string> value;  // present only for materialized entries
};

// Three tiers: L1 pure LRU over materialized values; L2 LRU of one-hop
// prefetch stubs; L3 a pinned hotspot set plus an LRU region of two-hop
// stubs. L2/L3 hits promote into L1 (pinned entries are copied, dynamic
// ones move). Value semantics: copying the cache snapshots its state.
class TieredCache {
public:
    explicit TieredCache(const TierConfig& cfg);

    // Pre-seed L3 with the hotspot_size highest-degree nodes (ties by
    // ascending node id) as a pinned, non-evictable set.
    void init_hotspots(const AssociationGraph& assoc, size_t hotspot_size);

    LookupResult lookup(const CacheKey& key);

    // Insert into L1 and prefetch the node's one-hop neighbors into L2 and
    // exactly-distance-2 nodes into L3. Empty node_id skips prefetching.
    void admit(const CacheKey& key, std::string value, const std::string& node_id,
               const AssociationGraph* assoc);

    void prefetch_one_hop(const std::string& node_id, const AssociationGraph& assoc);
    void prefetch_two_hop(const std::string& node_id, const AssociationGraph& assoc);

    // Warm-up lookups update recency and promotion state but not stats.
    void set_warmup(bool warmup) { warmup_ = warmup; }
    // Disabling promotion keeps L2/L3 hits in place (tier-decoupled mode).
    void set_promote_on_hit(bool promote) { promote_on_hit_ = promote; }

    const CacheStats& stats() const { return stats_; }
    void reset_stats() { stats_ = CacheStats{}; }

    std::vector<CacheKey> l1_keys_mru_first() const;
    bool in_l1(const CacheKey& key) const { return l1_index_.count(key) > 0; }
    bool in_l2(const CacheKey& key) const { return l2_index_.count(key) > 0; }
    bool in_l3(const CacheKey& key) const;
    bool is_pinned(const CacheKey& key) const { return pinned_.count(key) > 0; }

private:
    struct Entry {
        CacheKey key;
        std::optional<std::string> value;
    };
    using EntryList = std::list<Entry>;

    void touch_l1(EntryList::iterator it);
    void insert_l1(Entry entry);
    void insert_stub(EntryList& list, std::map<CacheKey, EntryList::iterator>& index,
                     size_t capacity, const CacheKey& key);
    size_t l3_dynamic_capacity() const;
    void record(CacheOutcome outcome);

    TierConfig cfg_;
    bool warmup_ = false;
    bool promote_on_hit_ = true;
    CacheStats stats_;

    EntryList l1_;  // MRU first
    std::map<CacheKey, EntryList::iterator> l1_index_;
    EntryList l2_;
    std::map<CacheKey, EntryList::iterator> l2_index_;
    EntryList l3_dynamic_;
    std::map<CacheKey, EntryList::iterator> l3_index_;
    std::set<CacheKey> pinned_;

public:
    TieredCache(const TieredCache& other);
    TieredCache& operator=(const TieredCache& other);
};

// Thread-safe facade: linearizable lookups/admissions for concurrent use.
class SharedCache {
public:
    explicit SharedCache(const TierConfig& cfg) : cache_(cfg) {}

    void init_hotspots(const AssociationGraph& assoc, size_t hotspot_size) {
        std::lock_guard<std::mutex> lock(mu_);
        cache_.init_hotspots(assoc, hotspot_size);
    }
    LookupResult lookup(const CacheKey& key) {
        std::lock_guard<std::mutex> lock(mu_);
        return cache_.lookup(key);
    }
    void admit(const CacheKey& key, std::string value, const std::string& node_id,
               const AssociationGraph* assoc) {
        std::lock_guard<std::mutex> lock(mu_);
        cache_.admit(key, std::move(value), node_id, assoc);
    }
    CacheStats stats() const {
        std::lock_guard<std::mutex> lock(mu_);
        return cache_.stats();
    }

private:
    mutable std::mutex mu_;
    TieredCache cache_;
};

}  // namespace hyfed
