#include "hyfed/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "hyfed/common.hpp"
#include "hyfed/models.hpp"
#include "hyfed/tokenizer.hpp"

namespace hyfed {

using ordered_json = nlohmann::ordered_json;

std::string Query::text() const {
    if (title.empty()) return abstract_text;
    if (abstract_text.empty()) return title;
    return title + " " + abstract_text;
}

bool Query::valid() const {
    const std::string joined = title + abstract_text;
    return joined.find_first_not_of(" \t\r\n\f\v") != std::string::npos;
}

const char* modality_name(Modality m) {
    switch (m) {
        case Modality::Text: return "text";
        case Modality::Sql: return "sql";
        case Modality::Kg: return "kg";
    }
    return "?";
}

Modality parse_modality(const std::string& s) {
    if (s == "text") return Modality::Text;
    if (s == "sql") return Modality::Sql;
    if (s == "kg") return Modality::Kg;
    throw UsageError("unknown modality: " + s);
}

const PatientRecord* Corpus::find(const std::string& uid) const {
    auto it = by_uid_.find(uid);
    return it == by_uid_.end() ? nullptr : &records[it->second];
}

Corpus make_corpus(Modality modality, std::vector<PatientRecord> records) {
    Corpus c;
    c.modality = modality;
    c.records = std::move(records);
    for (size_t i = 0; i < c.records.size(); ++i) {
        const auto& rec = c.records[i];
        if (rec.uid.empty()) {
            throw ParseError("record " + std::to_string(i + 1) + ": empty uid");
        }
        if (!c.by_uid_.emplace(rec.uid, i).second) {
            throw ParseError("duplicate uid " + rec.uid);
        }
        if (rec.body.empty() && rec.fields.empty() && rec.triples.empty()) {
            throw ParseError("record " + rec.uid + ": all of body/fields/triples empty");
        }
        std::unordered_set<std::string> seen;
        for (auto& tok : tokenize(rec.title + " " + rec.body)) {
            if (seen.insert(tok).second) ++c.vocabulary[tok];
        }
    }
    return c;
}

namespace {

PatientRecord parse_record_line(const std::string& line, size_t line_no) {
    ordered_json j;
    try {
        j = ordered_json::parse(line);
    } catch (const ordered_json::exception& e) {
        throw ParseError("line " + std::to_string(line_no) + ": malformed JSON: " + e.what());
    }
    if (!j.is_object()) {
        throw ParseError("line " + std::to_string(line_no) + ": record is not a JSON object");
    }
    PatientRecord rec;
    auto as_string = [&](const ordered_json& v) -> std::string {
        return v.is_string() ? v.get<std::string>() : v.dump();
    };
    if (j.contains("uid")) rec.uid = as_string(j["uid"]);
    if (rec.uid.empty()) {
        throw ParseError("line " + std::to_string(line_no) + ": missing or empty uid");
    }
    if (j.contains("title")) rec.title = as_string(j["title"]);
    if (j.contains("body")) rec.body = as_string(j["body"]);
    if (j.contains("fields")) {
        if (!j["fields"].is_object()) {
            throw ParseError("line " + std::to_string(line_no) + ": fields is not an object");
        }
        for (auto& [k, v] : j["fields"].items()) rec.fields.emplace_back(k, as_string(v));
    }
    if (j.contains("triples")) {
        if (!j["triples"].is_array()) {
            throw ParseError("line " + std::to_string(line_no) + ": triples is not an array");
        }
        for (const auto& t : j["triples"]) {
            if (!t.is_array() || t.size() != 3) {
                throw ParseError("line " + std::to_string(line_no) +
                                 ": triple is not a [subject, relation, object] array");
            }
            rec.triples.push_back({as_string(t[0]), as_string(t[1]), as_string(t[2])});
        }
    }
    return rec;
}

}  // namespace

Corpus ingest_corpus_text(const std::string& content, Modality modality) {
    std::vector<PatientRecord> records;
    std::istringstream in(content);
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        records.push_back(parse_record_line(line, line_no));
    }
    return make_corpus(modality, std::move(records));
}

Corpus ingest_corpus(const std::string& path, Modality modality) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open corpus file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return ingest_corpus_text(buf.str(), modality);
}

PropertyGraph build_graph(const Corpus& corpus) {
    PropertyGraph g;
    std::unordered_map<std::string, std::string> uid_by_norm;
    for (const auto& rec : corpus.records) uid_by_norm.emplace(normalize_name(rec.uid), rec.uid);

    auto intern = [&](const std::string& surface) -> uint32_t {
        const std::string norm = normalize_name(surface);
        auto it = g.name_index.find(norm);
        if (it != g.name_index.end()) return it->second;
        const auto id = static_cast<uint32_t>(g.nodes.size());
        auto uit = uid_by_norm.find(norm);
        if (uit != uid_by_norm.end()) {
            g.nodes.push_back({"Patient", uit->second});
        } else {
            g.nodes.push_back({"Entity", norm});
        }
        g.name_index.emplace(norm, id);
        g.incident.emplace_back();
        return id;
    };

    for (const auto& rec : corpus.records) {
        for (const auto& t : rec.triples) {
            if (normalize_name(t.subject).empty() || normalize_name(t.object).empty() ||
                t.relation.empty()) {
                ++g.skipped_triples;
                continue;
            }
            const uint32_t s = intern(t.subject);
            const uint32_t o = intern(t.object);
            const auto edge_idx = g.edges.size();
            g.edges.push_back({s, t.relation, o});
            g.incident[s].push_back(edge_idx);
            if (o != s) g.incident[o].push_back(edge_idx);
        }
    }
    return g;
}

std::vector<std::string> corpus_entity_names(const Corpus& corpus) {
    std::unordered_set<std::string> uid_norms;
    for (const auto& rec : corpus.records) uid_norms.insert(normalize_name(rec.uid));
    std::set<std::string> names;
    for (const auto& rec : corpus.records) {
        for (const auto& t : rec.triples) {
            for (const auto* part : {&t.subject, &t.object}) {
                const std::string norm = normalize_name(*part);
                if (!norm.empty() && uid_norms.count(norm) == 0) names.insert(norm);
            }
        }
    }
    return {names.begin(), names.end()};
}

std::vector<std::string> record_entities(const PatientRecord& rec,
                                         const std::vector<std::string>& ner_dictionary) {
    std::vector<std::string> out;
    std::unordered_set<std::string> seen;
    const std::string own = normalize_name(rec.uid);
    if (!rec.triples.empty()) {
        for (const auto& t : rec.triples) {
            for (const auto* part : {&t.subject, &t.object}) {
                const std::string norm = normalize_name(*part);
                if (norm.empty() || norm == own) continue;
                if (seen.insert(norm).second) out.push_back(norm);
            }
        }
        return out;
    }
    for (auto& name : dictionary_extract_entities(rec.body, ner_dictionary)) {
        if (seen.insert(name).second) out.push_back(std::move(name));
    }
    return out;
}

const std::vector<std::string>& AssociationGraph::neighbors(const std::string& id) const {
    static const std::vector<std::string> empty;
    auto it = adjacency.find(id);
    return it == adjacency.end() ? empty : it->second;
}

size_t AssociationGraph::edge_count() const {
    size_t total = 0;
    for (const auto& [_, adj] : adjacency) total += adj.size();
    return total / 2;
}

AssociationGraph build_association_graph(const Corpus& corpus) {
    AssociationGraph g;
    const auto dictionary = corpus_entity_names(corpus);
    std::unordered_map<std::string, std::string> uid_by_norm;
    for (const auto& rec : corpus.records) uid_by_norm.emplace(normalize_name(rec.uid), rec.uid);
    std::map<std::string, std::set<std::string>> adj;
    for (const auto& rec : corpus.records) {
        adj[rec.uid];  // isolated records still get a node
        for (const auto& entity : record_entities(rec, dictionary)) {
            // A triple endpoint naming another record links record to record.
            auto uit = uid_by_norm.find(entity);
            const std::string& node = uit == uid_by_norm.end() ? entity : uit->second;
            if (node == rec.uid) continue;
            adj[rec.uid].insert(node);
            adj[node].insert(rec.uid);
        }
    }
    for (auto& [node, nbrs] : adj) {
        g.adjacency.emplace(node, std::vector<std::string>(nbrs.begin(), nbrs.end()));
    }
    for (const auto& rec : corpus.records) g.record_nodes.push_back(rec.uid);
    std::sort(g.record_nodes.begin(), g.record_nodes.end());
    return g;
}

}  // namespace hyfed
