#include "hyfed/kg_retrieval.hpp"

#include <algorithm>

#include "hyfed/common.hpp"
#include "hyfed/tokenizer.hpp"

namespace hyfed {

namespace {

bool label_excluded(const std::string& label, const std::vector<std::string>& excluded) {
    return std::find(excluded.begin(), excluded.end(), label) != excluded.end();
}

}  // namespace

std::vector<EntityMatch> match_entity(const std::string& entity, const PropertyGraph& graph,
                                      const Reranker& reranker, const KgParams& params) {
    std::vector<EntityMatch> matches;
    const std::string norm = normalize_name(entity);

    auto it = graph.name_index.find(norm);
    if (it != graph.name_index.end() &&
        !label_excluded(graph.node(it->second).label, params.exclude_labels)) {
        EntityMatch m;
        m.entity = entity;
        m.node_id = it->second;
        m.s_entity = 1.0;
        m.stage = EntityMatch::Stage::Exact;
        matches.push_back(std::move(m));
        return matches;
    }

    for (uint32_t id = 0; id < graph.nodes.size(); ++id) {
        if (label_excluded(graph.node(id).label, params.exclude_labels)) continue;
        const double s = reranker.score(entity, graph.node(id).name);
        if (s < params.tau) continue;
        EntityMatch m;
        m.entity = entity;
        m.node_id = id;
        m.s_entity = s;
        m.stage = EntityMatch::Stage::Semantic;
        matches.push_back(std::move(m));
    }
    std::sort(matches.begin(), matches.end(), [&](const EntityMatch& a, const EntityMatch& b) {
        if (a.s_entity != b.s_entity) return a.s_entity > b.s_entity;
        return graph.node(a.node_id).name < graph.node(b.node_id).name;
    });
    if (matches.size() > params.semantic_topk) matches.resize(params.semantic_topk);
    return matches;
}

std::string render_statement(const std::string& entity_name, const std::string& relation,
                             const std::string& patient_uid) {
    std::string out = "Entity '";
    out += entity_name;
    out += "' --";
    out += relation;
    out += "--> Patient '";
    out += patient_uid;
    out += "'";
    return out;
}

std::vector<CandidateStatement> patient_paths(const PropertyGraph& graph,
                                              const EntityMatch& match) {
    std::vector<CandidateStatement> out;
    const uint32_t id = static_cast<uint32_t>(match.node_id);
    for (size_t edge_idx : graph.incident[id]) {
        const auto& edge = graph.edges[edge_idx];
        const uint32_t other = edge.src == id ? edge.dst : edge.src;
        if (other == id && edge.src == edge.dst) continue;  // self-loop can't reach a patient
        if (!graph.is_patient(other)) continue;
        CandidateStatement stmt;
        stmt.patient_uid = graph.node(other).name;
        stmt.relation = edge.relation;
        stmt.text = render_statement(graph.node(id).name, edge.relation, stmt.patient_uid);
        stmt.s_entity = match.s_entity;
        out.push_back(std::move(stmt));
    }
    std::sort(out.begin(), out.end(), [](const CandidateStatement& a, const CandidateStatement& b) {
        if (a.relation != b.relation) return a.relation < b.relation;
        return a.patient_uid < b.patient_uid;
    });
    return out;
}

double fuse_statement(double s_entity, double s_stmt, double alpha) {
    if (alpha < 0.0 || alpha > 1.0) throw Error("kg alpha must be in [0,1]");
    return alpha * s_entity + (1.0 - alpha) * s_stmt;
}

KgResult retrieve_kg(const PropertyGraph& graph, const Query& query, const Ner& ner,
                     const Reranker& reranker, const KgParams& params) {
    const std::string query_text = query.text();
    std::vector<CandidateStatement> all;

    for (const auto& mention : ner.extract(query_text)) {
        for (const auto& match : match_entity(mention, graph, reranker, params)) {
            for (auto stmt : patient_paths(graph, match)) {
                stmt.s_stmt = reranker.score(query_text, stmt.text);
                stmt.s_final = fuse_statement(stmt.s_entity, stmt.s_stmt, params.alpha);
                all.push_back(std::move(stmt));
            }
        }
    }

    std::sort(all.begin(), all.end(), [](const CandidateStatement& a, const CandidateStatement& b) {
        if (a.s_final != b.s_final) return a.s_final > b.s_final;
        if (a.patient_uid != b.patient_uid) return a.patient_uid < b.patient_uid;
        return a.text < b.text;
    });

    KgResult result;
    for (auto& stmt : all) {
        const bool seen = std::any_of(result.statements.begin(), result.statements.end(),
                                      [&](const CandidateStatement& s) {
                                          return s.patient_uid == stmt.patient_uid;
                                      });
        if (seen) continue;
        ScoredCandidate cand;
        cand.uid = stmt.patient_uid;
        cand.score = stmt.s_final;
        cand.view = stmt.text;
        cand.signals["s_entity"] = stmt.s_entity;
        cand.signals["s_stmt"] = stmt.s_stmt;
        cand.signals["s_final"] = stmt.s_final;
        result.candidates.push_back(std::move(cand));
        result.statements.push_back(std::move(stmt));
        if (result.candidates.size() == params.k) break;
    }
    return result;
}

}  // namespace hyfed
