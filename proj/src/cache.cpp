#include "hyfed/cache.hpp"

#include <algorithm>

#include "hyfed/common.hpp"
#include "hyfed/digest.hpp"
#include "hyfed/tokenizer.hpp"

namespace hyfed {

CacheKey CacheKey::from_query(std::string_view query_text, Modality modality, size_t top_k) {
    std::string material = "query\x1f";
    material += join_tokens(tokenize(query_text));
    material += '\x1f';
    material += modality_name(modality);
    material += '\x1f';
    material += std::to_string(top_k);
    return CacheKey{fnv1a64(material)};
}

CacheKey CacheKey::from_node(std::string_view node_id) {
    std::string material = "node\x1f";
    material += node_id;
    return CacheKey{fnv1a64(material)};
}

void TierConfig::validate() const {
    if (l1_capacity < 1 || l2_capacity < 1 || l3_capacity < 1)
        throw ConfigError("cache capacities must be >= 1");
    if (l1_ms < 0 || l2_ms < 0 || l3_ms < 0 || miss_ms < 0)
        throw ConfigError("cache latencies must be >= 0");
    if (!(l1_ms <= l2_ms && l2_ms <= l3_ms && l3_ms <= miss_ms))
        throw ConfigError("cache latencies must be monotone l1 <= l2 <= l3 <= miss");
}

const char* outcome_name(CacheOutcome o) {
    switch (o) {
        case CacheOutcome::L1Hit: return "l1";
        case CacheOutcome::L2Hit: return "l2";
        case CacheOutcome::L3Hit: return "l3";
        case CacheOutcome::Miss: return "miss";
    }
    return "?";
}

double CacheStats::rate(uint64_t part) const {
    const uint64_t t = total();
    return t == 0 ? 0.0 : static_cast<double>(part) / static_cast<double>(t);
}

double CacheStats::mean_latency_ms(const TierConfig& cfg) const {
    const uint64_t t = total();
    if (t == 0) return 0.0;
    const double sum = static_cast<double>(l1_hits) * cfg.l1_ms +
                       static_cast<double>(l2_hits) * cfg.l2_ms +
                       static_cast<double>(l3_hits) * cfg.l3_ms +
                       static_cast<double>(misses) * cfg.miss_ms;
    return sum / static_cast<double>(t);
}

double CacheStats::latency_reduction(const TierConfig& cfg) const {
    if (cfg.miss_ms == 0.0) return 0.0;
    return (cfg.miss_ms - mean_latency_ms(cfg)) / cfg.miss_ms;
}

TieredCache::TieredCache(const TierConfig& cfg) : cfg_(cfg) { cfg_.validate(); }

TieredCache::TieredCache(const TieredCache& other)
    : cfg_(other.cfg_),
      warmup_(other.warmup_),
      promote_on_hit_(other.promote_on_hit_),
      stats_(other.stats_),
      l1_(other.l1_),
      l2_(other.l2_),
      l3_dynamic_(other.l3_dynamic_),
      pinned_(other.pinned_) {
    for (auto it = l1_.begin(); it != l1_.end(); ++it) l1_index_[it->key] = it;
    for (auto it = l2_.begin(); it != l2_.end(); ++it) l2_index_[it->key] = it;
    for (auto it = l3_dynamic_.begin(); it != l3_dynamic_.end(); ++it) l3_index_[it->key] = it;
}

TieredCache& TieredCache::operator=(const TieredCache& other) {
    if (this == &other) return *this;
    TieredCache copy(other);
    cfg_ = copy.cfg_;
    warmup_ = copy.warmup_;
    promote_on_hit_ = copy.promote_on_hit_;
    stats_ = copy.stats_;
    l1_ = std::move(copy.l1_);
    l2_ = std::move(copy.l2_);
    l3_dynamic_ = std::move(copy.l3_dynamic_);
    pinned_ = std::move(copy.pinned_);
    l1_index_.clear();
    l2_index_.clear();
    l3_index_.clear();
    for (auto it = l1_.begin(); it != l1_.end(); ++it) l1_index_[it->key] = it;
    for (auto it = l2_.begin(); it != l2_.end(); ++it) l2_index_[it->key] = it;
    for (auto it = l3_dynamic_.begin(); it != l3_dynamic_.end(); ++it) l3_index_[it->key] = it;
    return *this;
}

void TieredCache::init_hotspots(const AssociationGraph& assoc, size_t hotspot_size) {
    std::vector<std::pair<std::string, size_t>> degrees;
    degrees.reserve(assoc.adjacency.size());
    for (const auto& [node, neighbors] : assoc.adjacency)
        degrees.emplace_back(node, neighbors.size());
    std::sort(degrees.begin(), degrees.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (degrees.size() > hotspot_size) degrees.resize(hotspot_size);

    pinned_.clear();
    for (const auto& [node, degree] : degrees) pinned_.insert(CacheKey::from_node(node));
    // pinned keys own their L3 slots exclusively
    for (auto it = l3_dynamic_.begin(); it != l3_dynamic_.end();) {
        if (pinned_.count(it->key)) {
            l3_index_.erase(it->key);
            it = l3_dynamic_.erase(it);
        } else {
            ++it;
        }
    }
}

size_t TieredCache::l3_dynamic_capacity() const {
    return cfg_.l3_capacity > pinned_.size() ? cfg_.l3_capacity - pinned_.size() : 0;
}

void TieredCache::record(CacheOutcome outcome) {
    if (warmup_) return;
    switch (outcome) {
        case CacheOutcome::L1Hit: ++stats_.l1_hits; break;
        case CacheOutcome::L2Hit: ++stats_.l2_hits; break;
        case CacheOutcome::L3Hit: ++stats_.l3_hits; break;
        case CacheOutcome::Miss: ++stats_.misses; break;
    }
}

void TieredCache::touch_l1(EntryList::iterator it) {
    l1_.splice(l1_.begin(), l1_, it);
}

void TieredCache::insert_l1(Entry entry) {
    auto idx = l1_index_.find(entry.key);
    if (idx != l1_index_.end()) {
        if (entry.value.has_value() || !idx->second->value.has_value())
            idx->second->value = std::move(entry.value);
        touch_l1(idx->second);
        return;
    }
    l1_.push_front(std::move(entry));
    l1_index_[l1_.front().key] = l1_.begin();
    while (l1_.size() > cfg_.l1_capacity) {
        l1_index_.erase(l1_.back().key);
        l1_.pop_back();
    }
}

void TieredCache::insert_stub(EntryList& list, std::map<CacheKey, EntryList::iterator>& index,
                              size_t capacity, const CacheKey& key) {
    auto it = index.find(key);
    if (it != index.end()) {
        list.splice(list.begin(), list, it->second);
        return;
    }
    if (capacity == 0) return;
    list.push_front(Entry{key, std::nullopt});
    index[key] = list.begin();
    while (list.size() > capacity) {
        index.erase(list.back().key);
        list.pop_back();
    }
}

LookupResult TieredCache::lookup(const CacheKey& key) {
    auto l1 = l1_index_.find(key);
    if (l1 != l1_index_.end()) {
        touch_l1(l1->second);
        record(CacheOutcome::L1Hit);
        return {CacheOutcome::L1Hit, l1->second->value};
    }

    auto l2 = l2_index_.find(key);
    if (l2 != l2_index_.end()) {
        record(CacheOutcome::L2Hit);
        Entry entry = *l2->second;
        if (promote_on_hit_) {
            l2_.erase(l2->second);
            l2_index_.erase(l2);
            insert_l1(entry);
        } else {
            l2_.splice(l2_.begin(), l2_, l2->second);
        }
        return {CacheOutcome::L2Hit, entry.value};
    }

    if (pinned_.count(key)) {
        record(CacheOutcome::L3Hit);
        if (promote_on_hit_) insert_l1(Entry{key, std::nullopt});  // pinned copy stays in L3
        return {CacheOutcome::L3Hit, std::nullopt};
    }
    auto l3 = l3_index_.find(key);
    if (l3 != l3_index_.end()) {
        record(CacheOutcome::L3Hit);
        Entry entry = *l3->second;
        if (promote_on_hit_) {
            l3_dynamic_.erase(l3->second);
            l3_index_.erase(l3);
            insert_l1(entry);
        } else {
            l3_dynamic_.splice(l3_dynamic_.begin(), l3_dynamic_, l3->second);
        }
        return {CacheOutcome::L3Hit, entry.value};
    }

    record(CacheOutcome::Miss);
    return {CacheOutcome::Miss, std::nullopt};
}

void TieredCache::admit(const CacheKey& key, std::string value, const std::string& node_id,
                        const AssociationGraph* assoc) {
    insert_l1(Entry{key, std::move(value)});
    if (node_id.empty() || assoc == nullptr || !assoc->has_node(node_id)) return;
    prefetch_one_hop(node_id, *assoc);
    prefetch_two_hop(node_id, *assoc);
}

void TieredCache::prefetch_one_hop(const std::string& node_id, const AssociationGraph& assoc) {
    for (const auto& neighbor : assoc.neighbors(node_id)) {
        const CacheKey key = CacheKey::from_node(neighbor);
        if (l1_index_.count(key)) continue;
        insert_stub(l2_, l2_index_, cfg_.l2_capacity, key);
    }
}

void TieredCache::prefetch_two_hop(const std::string& node_id, const AssociationGraph& assoc) {
    std::set<std::string> one_hop;
    for (const auto& n : assoc.neighbors(node_id)) one_hop.insert(n);
    std::set<std::string> two_hop;
    for (const auto& n : one_hop)
        for (const auto& m : assoc.neighbors(n)) {
            if (m == node_id || one_hop.count(m)) continue;
            two_hop.insert(m);
        }
    for (const auto& node : two_hop) {
        const CacheKey key = CacheKey::from_node(node);
        if (l1_index_.count(key) || pinned_.count(key)) continue;
        insert_stub(l3_dynamic_, l3_index_, l3_dynamic_capacity(), key);
    }
}

bool TieredCache::in_l3(const CacheKey& key) const {
    return pinned_.count(key) > 0 || l3_index_.count(key) > 0;
}

std::vector<CacheKey> TieredCache::l1_keys_mru_first() const {
    std::vector<CacheKey> out;
    out.reserve(l1_.size());
    for (const auto& e : l1_) out.push_back(e.key);
    return out;
}

}  // namespace hyfed
