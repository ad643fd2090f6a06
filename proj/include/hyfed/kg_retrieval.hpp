#pragma once

#include <string>
#include <vector>

#include "hyfed/corpus.hpp"
#include "hyfed/hit.hpp"
#include "hyfed/models.hpp"

namespace hyfed {

struct EntityMatch {
    enum class Stage { None, Exact, Semantic };
    std::string entity;   // query-side mention
    size_t node_id = 0;
    double s_entity = 0.0;
    Stage stage = Stage::None;
};

struct CandidateStatement {
    std::string text;  // Entity '<c>' --<Rel>--> Patient '<p>'
    std::string patient_uid;
    std::string relation;
    double s_entity = 0.0;
    double s_stmt = 0.0;
    double s_final = 0.0;
};

struct KgParams {
    double tau = 0.9;          // semantic-match acceptance threshold
    size_t semantic_topk = 5;  // matches kept per mention in the semantic stage
    double alpha = 0.5;        // weight on s_entity when fusing with s_stmt
    size_t k = 10;
    std::vector<std::string> exclude_labels = {"Patient"};
};

struct KgResult {
    ScoredCandidates candidates;                 // one per patient, winning statement as view
    std::vector<CandidateStatement> statements;  // parallel to candidates
};

// Exact lookup first (score 1.0); only if that fails, semantic scoring of
// the mention against every non-excluded node name, keeping scores >= tau
// ranked descending, truncated to semantic_topk.
std::vector<EntityMatch> match_entity(const std::string& entity, const PropertyGraph& graph,
                                      const Reranker& reranker, const KgParams& params);

// Statements for every edge joining the matched node to a Patient node, in
// either direction, ordered by (relation, patient uid) ascending.
std::vector<CandidateStatement> patient_paths(const PropertyGraph& graph,
                                              const EntityMatch& match);

// alpha*s_entity + (1-alpha)*s_stmt; alpha outside [0,1] is an error.
double fuse_statement(double s_entity, double s_stmt, double alpha);

std::string render_statement(const std::string& entity_name, const std::string& relation,
                             const std::string& patient_uid);

// Full pipeline: extract -> match -> paths -> statement rerank -> fuse ->
// sort (s_final desc, uid asc, text asc) -> per-patient max dedup -> top-k.
KgResult retrieve_kg(const PropertyGraph& graph, const Query& query, const Ner& ner,
                     const Reranker& reranker, const KgParams& params);

}  // namespace hyfed
