#pragma once

#include <string>
#include <vector>

namespace hyfed {

// Every checked-in fixture file, keyed by relative path. Content is fully
// deterministic: the primary files are hand-designed constant data; the
// derived/ files are computed from them through the library so any drift in
// tokenization, graph building, the workload generator, the simulator, or
// the embedder shows up as a byte diff.
struct FixtureSet {
    std::vector<std::pair<std::string, std::string>> files;  // rel path -> content

    const std::string& content(const std::string& rel_path) const;
};

FixtureSet generate_fixtures();

void write_fixtures(const FixtureSet& fs, const std::string& dir);

// Relative paths whose on-disk bytes differ from a fresh generation
// (missing files count as drifted).
std::vector<std::string> verify_fixtures(const std::string& dir);

}  // namespace hyfed
