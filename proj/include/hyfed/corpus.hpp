#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace hyfed {

struct Triple {
    std::string subject;
    std::string relation;
    std::string object;

    bool operator==(const Triple&) const = default;
};

// One patient record: the unit of retrieval. `fields` keeps column order,
// `triples` arrive pre-extracted in the input file.
struct PatientRecord {
    std::string uid;
    std::string title;
    std::string body;
    std::vector<std::pair<std::string, std::string>> fields;
    std::vector<Triple> triples;
};

struct Query {
    std::string title;
    std::string abstract_text;

    // Concatenated single query string used by every backend.
    std::string text() const;
    // title+abstract must be non-empty after whitespace trim.
    bool valid() const;
};

enum class Modality { Text, Sql, Kg };

const char* modality_name(Modality m);
Modality parse_modality(const std::string& s);

struct Corpus {
    Modality modality = Modality::Text;
    std::vector<PatientRecord> records;
    // term -> document-frequency over title+body token sets
    std::unordered_map<std::string, uint32_t> vocabulary;

    size_t size() const { return records.size(); }
    const PatientRecord* find(const std::string& uid) const;

private:
    friend Corpus make_corpus(Modality, std::vector<PatientRecord>);
    std::unordered_map<std::string, size_t> by_uid_;
};

// Validates records (unique non-empty uids, at least one non-empty part)
// and builds the vocabulary.
Corpus make_corpus(Modality modality, std::vector<PatientRecord> records);

// Line-delimited JSON, one record per line, keys uid/title/body/fields/triples
// (absent keys default empty). Errors name the offending line or uid.
Corpus ingest_corpus(const std::string& path, Modality modality);
Corpus ingest_corpus_text(const std::string& content, Modality modality);

struct GraphNode {
    std::string label;  // "Patient" or "Entity"
    std::string name;   // original surface (patients keep their exact uid)
};

// In-memory property graph over the corpus triples. Node identity is the
// normalized name; patient nodes are those whose normalized name equals a
// record uid's normalized form.
struct PropertyGraph {
    std::vector<GraphNode> nodes;
    struct Edge {
        uint32_t src;
        std::string relation;
        uint32_t dst;
    };
    std::vector<Edge> edges;
    std::unordered_map<std::string, uint32_t> name_index;  // normalized name -> node id
    std::vector<std::vector<size_t>> incident;             // node id -> edge indices
    uint32_t skipped_triples = 0;  // triples with an empty endpoint or relation

    const GraphNode& node(uint32_t id) const { return nodes[id]; }
    bool is_patient(uint32_t id) const { return nodes[id].label == "Patient"; }
};

PropertyGraph build_graph(const Corpus& corpus);

// Document–entity association graph: nodes are record uids and entity
// names, adjacency symmetric and lexicographically sorted. Entities come
// from triples when present, else from dictionary NER over the body using
// the corpus-wide entity name set.
struct AssociationGraph {
    std::map<std::string, std::vector<std::string>> adjacency;
    std::vector<std::string> record_nodes;  // sorted uids

    bool has_node(const std::string& id) const { return adjacency.count(id) > 0; }
    const std::vector<std::string>& neighbors(const std::string& id) const;
    size_t edge_count() const;  // undirected edges
};

AssociationGraph build_association_graph(const Corpus& corpus);

// Entity names attached to one record: triples first, dictionary-NER over
// the body as fallback. Normalized, deduplicated, first-occurrence order.
std::vector<std::string> record_entities(const PatientRecord& rec,
                                         const std::vector<std::string>& ner_dictionary);

// All distinct normalized entity names in the corpus triples (subjects and
// objects that are not record uids).
std::vector<std::string> corpus_entity_names(const Corpus& corpus);

}  // namespace hyfed
