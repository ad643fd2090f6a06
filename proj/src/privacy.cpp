#include "hyfed/privacy.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <regex>
#include <set>

#include "hyfed/common.hpp"
#include "hyfed/digest.hpp"
#include "hyfed/kernels.hpp"
#include "hyfed/prng.hpp"
#include "hyfed/tokenizer.hpp"

namespace hyfed {

bool PrivacyConfig::recognizer_enabled(std::string_view name) const {
    return std::find(recognizers.begin(), recognizers.end(), name) != recognizers.end();
}

std::vector<std::string> load_lexicon(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open lexicon file " + path);
    std::vector<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        size_t a = line.find_first_not_of(" \t");
        if (a == std::string::npos) continue;
        size_t b = line.find_last_not_of(" \t");
        std::string term = line.substr(a, b - a + 1);
        if (term.empty() || term[0] == '#') continue;
        out.push_back(std::move(term));
    }
    return out;
}

namespace {

bool is_ascii_alnum(unsigned char c) {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

// Word characters for boundary checks; multibyte UTF-8 lead/continuation
// bytes count as word characters so matches never split a codepoint.
bool is_wordish(unsigned char c) { return is_ascii_alnum(c) || c >= 0x80; }

bool bounded(std::string_view text, size_t start, size_t end) {
    if (start > 0 && is_wordish(static_cast<unsigned char>(text[start - 1]))) return false;
    if (end < text.size() && is_wordish(static_cast<unsigned char>(text[end]))) return false;
    return true;
}

std::string ascii_lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out)
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    return out;
}

// Every space-separated word of the surface starts with an uppercase letter.
bool capitalized_surface(std::string_view surface) {
    bool at_word_start = true;
    for (unsigned char c : surface) {
        if (c == ' ') {
            at_word_start = true;
            continue;
        }
        if (at_word_start) {
            if (!(c >= 'A' && c <= 'Z')) return false;
            at_word_start = false;
        }
    }
    return !surface.empty();
}

void detect_person(std::string_view text, const std::vector<std::string>& lexicon,
                   std::vector<PiiSpan>& out) {
    const std::string lower = ascii_lower(text);
    std::vector<PiiSpan> raw;
    for (const auto& name : lexicon) {
        const std::string needle = ascii_lower(name);
        if (needle.empty()) continue;
        size_t pos = 0;
        while ((pos = lower.find(needle, pos)) != std::string::npos) {
            const size_t end = pos + needle.size();
            if (bounded(text, pos, end) &&
                capitalized_surface(text.substr(pos, needle.size()))) {
                raw.push_back({pos, end, "PERSON", "person_lexicon"});
            }
            pos += 1;
        }
    }
    std::sort(raw.begin(), raw.end(), [](const PiiSpan& a, const PiiSpan& b) {
        if (a.start != b.start) return a.start < b.start;
        return a.end > b.end;
    });
    // Adjacent name hits separated by one space merge into a full-name span.
    for (size_t i = 0; i < raw.size();) {
        PiiSpan merged = raw[i];
        size_t j = i + 1;
        while (j < raw.size()) {
            if (raw[j].start <= merged.end + 1 && raw[j].end > merged.end &&
                (raw[j].start > merged.end
                     ? text.substr(merged.end, raw[j].start - merged.end) == " "
                     : true)) {
                merged.end = raw[j].end;
                ++j;
            } else if (raw[j].end <= merged.end) {
                ++j;  // contained
            } else {
                break;
            }
        }
        out.push_back(merged);
        i = j;
    }
}

struct PatternRule {
    std::regex re;
    int group;  // capture group whose span is reported
    bool digit_bounded;
};

void run_patterns(std::string_view text, const std::vector<PatternRule>& rules,
                  const std::string& category, const std::string& source,
                  std::vector<PiiSpan>& out) {
    const std::string subject(text);
    for (const auto& rule : rules) {
        auto begin = std::sregex_iterator(subject.begin(), subject.end(), rule.re);
        for (auto it = begin; it != std::sregex_iterator(); ++it) {
            const auto& m = (*it)[rule.group];
            if (!m.matched) continue;
            const size_t start = static_cast<size_t>(m.first - subject.begin());
            const size_t end = start + static_cast<size_t>(m.length());
            if (rule.digit_bounded) {
                if (start > 0 && std::isdigit(static_cast<unsigned char>(subject[start - 1])))
                    continue;
                if (end < subject.size() &&
                    std::isdigit(static_cast<unsigned char>(subject[end])))
                    continue;
            }
            out.push_back({start, end, category, source});
        }
    }
}

const std::vector<PatternRule>& date_rules() {
    static const std::vector<PatternRule> rules = [] {
        std::vector<PatternRule> r;
        r.push_back({std::regex(R"(\d{4}-\d{2}-\d{2})"), 0, true});
        r.push_back({std::regex(R"(\d{4}/\d{2}/\d{2})"), 0, true});
        r.push_back({std::regex(R"(\d{1,2}/\d{1,2}/\d{4})"), 0, true});
        const char* months =
            "(?:January|February|March|April|May|June|July|August|September|October|"
            "November|December|Jan|Feb|Mar|Apr|Jun|Jul|Aug|Sep|Sept|Oct|Nov|Dec)";
        r.push_back({std::regex(std::string(months) + R"(\.?\s+\d{1,2}(?:st|nd|rd|th)?,?\s+\d{4})",
                                std::regex::icase),
                     0, true});
        r.push_back({std::regex(R"(\d{1,2}\s+)" + std::string(months) + R"(,?\s+\d{4})",
                                std::regex::icase),
                     0, true});
        return r;
    }();
    return rules;
}

const std::vector<PatternRule>& phone_rules() {
    static const std::vector<PatternRule> rules = [] {
        std::vector<PatternRule> r;
        r.push_back({std::regex(R"(\(\d{3}\)\s?\d{3}[-.]\d{4})"), 0, true});
        r.push_back({std::regex(R"(\d{3}[-.]\d{3}[-.]\d{4})"), 0, true});
        r.push_back({std::regex(R"(\+\d{1,2}[- ]\d{3}[- ]\d{3}[- ]\d{4})"), 0, true});
        return r;
    }();
    return rules;
}

const std::vector<PatternRule>& email_rules() {
    static const std::vector<PatternRule> rules = {
        {std::regex(R"([A-Za-z0-9._%+-]+@[A-Za-z0-9.-]+\.[A-Za-z]{2,})"), 0, false}};
    return rules;
}

// Label anchors the match; only the digit run is the reported span. The
// separator class excludes '_' so placeholders like <ID_1> never re-match.
const std::vector<PatternRule>& id_rules() {
    static const std::vector<PatternRule> rules = {
        {std::regex(R"((?:MRN|SSN|ID|ACCT|CASE|RECORD)[ #:.-]*(\d{3,}))"), 1, true}};
    return rules;
}

void detect_age(std::string_view text, std::vector<PiiSpan>& out) {
    static const std::regex re(R"((\d{1,3})[ -]years?[ -]old)", std::regex::icase);
    const std::string subject(text);
    for (auto it = std::sregex_iterator(subject.begin(), subject.end(), re);
         it != std::sregex_iterator(); ++it) {
        const size_t start = static_cast<size_t>((*it)[0].first - subject.begin());
        const size_t end = start + static_cast<size_t>((*it)[0].length());
        if (start > 0 && std::isdigit(static_cast<unsigned char>(subject[start - 1]))) continue;
        if (!bounded(text, start, end)) continue;
        const long age = std::strtol((*it)[1].str().c_str(), nullptr, 10);
        if (age > 89) out.push_back({start, end, "AGE_OVER_89", "age_rule"});
    }
}

}  // namespace

// Longest-span-wins, then earliest start (category name as a final
// determinism key); returns non-overlapping spans sorted by start.
static std::vector<PiiSpan> resolve_overlaps(std::vector<PiiSpan> spans) {
    std::sort(spans.begin(), spans.end(), [](const PiiSpan& a, const PiiSpan& b) {
        const size_t la = a.end - a.start;
        const size_t lb = b.end - b.start;
        if (la != lb) return la > lb;
        if (a.start != b.start) return a.start < b.start;
        return a.category < b.category;
    });
    std::vector<PiiSpan> kept;
    for (const auto& s : spans) {
        const bool clash = std::any_of(kept.begin(), kept.end(), [&](const PiiSpan& k) {
            return s.start < k.end && k.start < s.end;
        });
        if (!clash) kept.push_back(s);
    }
    std::sort(kept.begin(), kept.end(),
              [](const PiiSpan& a, const PiiSpan& b) { return a.start < b.start; });
    return kept;
}

std::vector<PiiSpan> detect_pii(std::string_view text, const PrivacyConfig& cfg) {
    std::vector<PiiSpan> spans;
    if (text.empty()) return spans;
    if (cfg.recognizer_enabled("PERSON")) detect_person(text, cfg.person_lexicon, spans);
    if (cfg.recognizer_enabled("DATE")) run_patterns(text, date_rules(), "DATE", "date_patterns", spans);
    if (cfg.recognizer_enabled("PHONE"))
        run_patterns(text, phone_rules(), "PHONE", "phone_patterns", spans);
    if (cfg.recognizer_enabled("EMAIL"))
        run_patterns(text, email_rules(), "EMAIL", "email_pattern", spans);
    if (cfg.recognizer_enabled("ID")) run_patterns(text, id_rules(), "ID", "id_patterns", spans);
    if (cfg.recognizer_enabled("AGE_OVER_89")) detect_age(text, spans);
    return resolve_overlaps(std::move(spans));
}

MaskedText mask(std::string_view text, const std::vector<PiiSpan>& spans) {
    for (size_t i = 0; i < spans.size(); ++i) {
        if (spans[i].start >= spans[i].end || spans[i].end > text.size())
            throw Error("invalid pii span");
        if (i > 0 && spans[i].start < spans[i - 1].end)
            throw Error("overlapping pii spans");
    }
    MaskedText out;
    std::map<std::pair<std::string, std::string>, std::string> assigned;
    std::map<std::string, int> counters;
    size_t pos = 0;
    for (const auto& span : spans) {
        out.text.append(text.substr(pos, span.start - pos));
        const std::string surface(text.substr(span.start, span.end - span.start));
        const auto key = std::make_pair(span.category, surface);
        auto it = assigned.find(key);
        if (it == assigned.end()) {
            const int n = ++counters[span.category];
            std::string placeholder = "<" + span.category + "_" + std::to_string(n) + ">";
            it = assigned.emplace(key, placeholder).first;
            out.mapping.emplace_back(placeholder, surface);
        }
        out.text.append(it->second);
        pos = span.end;
    }
    out.text.append(text.substr(pos));
    return out;
}

std::vector<std::string> split_sentences(std::string_view text) {
    std::vector<std::string> out;
    std::string current;
    auto flush = [&] {
        size_t a = current.find_first_not_of(" \t\r\n");
        if (a == std::string::npos) {
            current.clear();
            return;
        }
        size_t b = current.find_last_not_of(" \t\r\n");
        out.push_back(current.substr(a, b - a + 1));
        current.clear();
    };
    for (size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (c == '\n') {
            flush();
            continue;
        }
        current.push_back(c);
        if (c == '.' || c == '?' || c == '!') {
            // absorb the rest of the terminator run
            while (i + 1 < text.size() &&
                   (text[i + 1] == '.' || text[i + 1] == '?' || text[i + 1] == '!')) {
                current.push_back(text[++i]);
            }
            flush();
        }
    }
    flush();
    return out;
}

std::string erase_irrelevant(std::string_view text, const Query& query, double theta,
                             const Embedder& embedder,
                             const std::vector<std::string>& query_entities) {
    const auto sentences = split_sentences(text);
    if (sentences.empty()) return "";

    std::set<std::string> entity_tokens;
    for (const auto& e : query_entities)
        for (auto& t : tokenize(e)) entity_tokens.insert(std::move(t));

    const auto query_vec = embedder.embed(query.text());
    std::vector<bool> keep(sentences.size(), false);
    double best_cos = -1.0;
    size_t best_idx = 0;
    for (size_t i = 0; i < sentences.size(); ++i) {
        bool has_entity = false;
        for (const auto& t : tokenize(sentences[i])) {
            if (entity_tokens.count(t)) {
                has_entity = true;
                break;
            }
        }
        const double cos = std::max(
            0.0, static_cast<double>(kernels::cosine(embedder.embed(sentences[i]), query_vec)));
        if (cos > best_cos) {
            best_cos = cos;
            best_idx = i;
        }
        keep[i] = has_entity || cos >= theta;
    }
    if (std::none_of(keep.begin(), keep.end(), [](bool b) { return b; })) keep[best_idx] = true;

    std::string out;
    for (size_t i = 0; i < sentences.size(); ++i) {
        if (!keep[i]) continue;
        if (!out.empty()) out += " ";
        out += sentences[i];
    }
    return out;
}

namespace {

constexpr double kSealScale = 65536.0;

std::string seal_tag_message(const std::vector<int64_t>& payload, uint32_t dim) {
    std::string msg;
    msg.reserve(payload.size() * 8 + 4);
    for (int64_t v : payload) {
        uint64_t u = static_cast<uint64_t>(v);
        for (int b = 0; b < 8; ++b) msg.push_back(static_cast<char>((u >> (8 * b)) & 0xff));
    }
    for (int b = 0; b < 4; ++b) msg.push_back(static_cast<char>((dim >> (8 * b)) & 0xff));
    return msg;
}

std::vector<uint32_t> keyed_permutation(size_t n, uint64_t seed) {
    std::vector<uint32_t> perm(n);
    for (size_t i = 0; i < n; ++i) perm[i] = static_cast<uint32_t>(i);
    SplitMix64 rng(seed);
    for (size_t i = n; i > 1; --i) {
        const size_t j = static_cast<size_t>(rng.next_below(i));
        std::swap(perm[i - 1], perm[j]);
    }
    return perm;
}

}  // namespace

SealedVector seal_features(const std::vector<float>& v, std::string_view key) {
    if (key.empty()) throw Error("seal key must be non-empty");
    SealedVector sealed;
    sealed.dim = static_cast<uint32_t>(v.size());

    std::vector<int64_t> quantized(v.size());
    for (size_t i = 0; i < v.size(); ++i)
        quantized[i] = std::llround(static_cast<double>(v[i]) * kSealScale);

    const auto perm = keyed_permutation(v.size(), keyed_seed(key, "hyfed.seal.perm"));
    SplitMix64 stream(keyed_seed(key, "hyfed.seal.stream"));
    sealed.payload.resize(v.size());
    for (size_t i = 0; i < v.size(); ++i) {
        const uint64_t mixed =
            static_cast<uint64_t>(quantized[perm[i]]) + stream.next();
        sealed.payload[i] = static_cast<int64_t>(mixed);
    }

    const auto mac = hmac_sha256(key, seal_tag_message(sealed.payload, sealed.dim));
    sealed.tag.assign(mac.begin(), mac.begin() + 16);
    return sealed;
}

std::vector<float> unseal(const SealedVector& sealed, std::string_view key) {
    if (key.empty()) throw Error("seal key must be non-empty");
    if (sealed.payload.size() != sealed.dim) throw Error("sealed vector shape mismatch");
    const auto mac = hmac_sha256(key, seal_tag_message(sealed.payload, sealed.dim));
    if (sealed.tag.size() != 16 || !std::equal(sealed.tag.begin(), sealed.tag.end(), mac.begin()))
        throw Error("sealed vector integrity check failed");

    const auto perm = keyed_permutation(sealed.dim, keyed_seed(key, "hyfed.seal.perm"));
    SplitMix64 stream(keyed_seed(key, "hyfed.seal.stream"));
    std::vector<int64_t> quantized(sealed.dim);
    for (size_t i = 0; i < sealed.payload.size(); ++i) {
        const uint64_t mixed = static_cast<uint64_t>(sealed.payload[i]) - stream.next();
        quantized[perm[i]] = static_cast<int64_t>(mixed);
    }
    std::vector<float> out(sealed.dim);
    for (size_t i = 0; i < quantized.size(); ++i)
        out[i] = static_cast<float>(static_cast<double>(quantized[i]) / kSealScale);
    return out;
}

namespace {

std::string truncate_tokens(const std::string& text, size_t max_tokens) {
    const auto spans = tokenize_spans(text);
    if (spans.size() <= max_tokens) return text;
    if (max_tokens == 0) return "";
    return text.substr(0, spans[max_tokens - 1].end);
}

std::vector<PiiSpan> uid_literal_spans(std::string_view text,
                                       const std::vector<std::string>& uids) {
    std::vector<PiiSpan> out;
    for (const auto& uid : uids) {
        if (uid.empty()) continue;
        size_t pos = 0;
        while ((pos = text.find(uid, pos)) != std::string::npos) {
            const size_t end = pos + uid.size();
            if (bounded(text, pos, end)) out.push_back({pos, end, "ID", "uid_literal"});
            pos += 1;
        }
    }
    return out;
}

}  // namespace

std::vector<Summary> summarize(const std::vector<SummarizeInput>& records, const Query& query,
                               Modality modality, const PrivacyConfig& cfg,
                               const Embedder& embedder,
                               const std::vector<std::string>& query_entities,
                               const std::vector<std::string>& known_uids,
                               const Summarizer* drafter) {
    std::vector<Summary> out;
    out.reserve(records.size());
    for (const auto& rec : records) {
        std::string body;
        bool drafted = false;
        if (drafter) {
            try {
                body = drafter->draft(rec.view, query.text());
                drafted = true;
            } catch (const std::exception& e) {
                HYFED_LOG_WARN("summarizer service failed (%s); using extractive path",
                               e.what());
            }
        }
        if (!drafted) {
            body = erase_irrelevant(rec.view, query, cfg.theta, embedder, query_entities);
            body = truncate_tokens(body, cfg.max_summary_tokens);
        }

        for (int round = 0; round < 3; ++round) {
            auto spans = detect_pii(body, cfg);
            auto uid_spans = uid_literal_spans(body, known_uids);
            spans.insert(spans.end(), uid_spans.begin(), uid_spans.end());
            spans = resolve_overlaps(std::move(spans));
            if (spans.empty()) break;
            body = mask(body, spans).text;
            if (round == 2) {
                auto residue = detect_pii(body, cfg);
                auto uid_residue = uid_literal_spans(body, known_uids);
                if (!residue.empty() || !uid_residue.empty()) body = "[REDACTED]";
            }
        }

        Summary s;
        s.patient_uid_hash = keyed_uid_hash(cfg.client_key, rec.uid);
        s.text = std::move(body);
        s.source_modality = modality;
        s.score = rec.score;
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace hyfed
