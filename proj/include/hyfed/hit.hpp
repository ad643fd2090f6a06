#pragma once

#include <map>
#include <string>
#include <vector>

namespace hyfed {

// One retrieval result. `view` is the modality-rendered text that downstream
// summarization operates on: the record body for text, "column: value;"
// lines for sql, the winning statement for kg. `signals` carries the
// per-signal sub-scores that produced `score`.
struct ScoredCandidate {
    std::string uid;
    double score = 0.0;
    std::string view;
    std::map<std::string, double> signals;
};

using ScoredCandidates = std::vector<ScoredCandidate>;

}  // namespace hyfed
