#pragma once

#include <string>

#include "hyfed/corpus.hpp"

namespace hyfed {

// Serialized index container: <dir>/index.json with magic "HYFED1".
// Derived structures (vocabulary, graphs, vectors) are rebuilt on load,
// so the container only stores the records and modality.
void save_index(const Corpus& corpus, const std::string& dir);

// Throws ParseError on missing file, bad magic, or version mismatch.
Corpus load_index(const std::string& dir);

}  // namespace hyfed
