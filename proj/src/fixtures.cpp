#include "hyfed/fixtures.hpp"

#include <array>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "hyfed/cache.hpp"
#include "hyfed/common.hpp"
#include "hyfed/corpus.hpp"
#include "hyfed/kernels.hpp"
#include "hyfed/models.hpp"
#include "hyfed/tokenizer.hpp"
#include "hyfed/workload.hpp"

namespace hyfed {

namespace {

// Shared filler sentences. Records built around rare-term weighting (the
// distractor and short-note groups) deliberately omit them.
constexpr const char* kStock =
    "Patient presented for clinical review. Vitals remained stable throughout the visit. "
    "Plan discussed with care team.";

struct RecSpec {
    std::string uid;
    std::string title;
    std::string body;
    std::vector<std::pair<std::string, std::string>> fields;
    std::vector<std::array<std::string, 3>> triples;
};

std::vector<RecSpec> record_specs() {
    std::vector<RecSpec> recs;
    auto add = [&recs](std::string uid, std::string title, std::string body,
                       std::vector<std::pair<std::string, std::string>> fields = {},
                       std::vector<std::array<std::string, 3>> triples = {}) {
        recs.push_back(
            {std::move(uid), std::move(title), std::move(body), std::move(fields),
             std::move(triples)});
    };
    auto stock = [](const std::string& lead) { return lead + " " + kStock; };

    // Rare-condition notes: the query terms dominate tf-idf but drown in a
    // stock-heavy token set.
    add("PT-0001", "Erythrodermia, pruritus, desquamation",
        stock("Findings: erythrodermia, pruritus, desquamation."));
    add("PT-0002", "Thyrotoxicosis, palpitations, tremor",
        stock("Findings: thyrotoxicosis, palpitations, tremor."));
    add("PT-0003", "Sarcoidosis, granuloma, uveitis",
        stock("Findings: sarcoidosis, granuloma, uveitis."));
    add("PT-0004", "Amyloidosis, proteinuria, neuropathy",
        stock("Findings: amyloidosis, proteinuria, neuropathy."));

    // Their short distractors: high token overlap ratio, weak tf-idf.
    add("PT-0005", "Pruritus, desquamation",
        "Biopsy and dermatoscopy reviewed; emollient phototherapy planned.");
    add("PT-0006", "Palpitations, tremor",
        "Methimazole and radioiodine reviewed; goiter exophthalmos planned.");
    add("PT-0007", "Granuloma, uveitis",
        "Mediastinal lymphadenopathy reviewed; corticosteroid and bronchoscopy planned.");
    add("PT-0008", "Proteinuria, neuropathy",
        "Congophilic birefringence reviewed; fibril and paraprotein planned.");

    // Minimal notes that win on overlap ratio but not on term weighting.
    add("PT-0009", "Insomnia, bruxism, apnea", "Polysomnography.");
    add("PT-0010", "Vertigo, tinnitus, nystagmus", "Vestibular.");
    add("PT-0011", "Dysphagia, odynophagia, regurgitation", "Manometry.");
    add("PT-0012", "Claudication, cyanosis, pallor", "Doppler.");

    // Their distractors: repeated query terms pump tf-idf, stock tokens
    // dilute the overlap ratio.
    add("PT-0013", "Insomnia, bruxism, apnea",
        stock("Recurring insomnia, bruxism, apnea episodes; insomnia bruxism apnea documented."));
    add("PT-0014", "Vertigo, tinnitus, nystagmus",
        stock("Recurring vertigo, tinnitus, nystagmus episodes; vertigo tinnitus nystagmus "
              "documented."));
    add("PT-0015", "Dysphagia, odynophagia, regurgitation",
        stock("Recurring dysphagia, odynophagia, regurgitation episodes; dysphagia odynophagia "
              "regurgitation documented."));
    add("PT-0016", "Claudication, cyanosis, pallor",
        stock("Recurring claudication, cyanosis, pallor episodes; claudication cyanosis pallor "
              "documented."));

    add("PT-0017", "Lisinopril cough",
        stock("Persistent dry cough attributed to lisinopril; cough resolved after stopping "
              "lisinopril. Findings: rechallenge positive. Assessed by Daniel Okafor on "
              "2019-03-14. Callback 555-301-7788 arranged. MRN 4482913 confirmed at intake."),
        {{"age", "61"}, {"sex", "M"}, {"site", "north clinic"}},
        {{"PT-0017", "TREATED_WITH", "Lisinopril"}});
    add("PT-0018", "Metformin intolerance",
        stock("Metformin held after admission for lactic acidosis; metformin restarted at "
              "reduced dose. Spouse Evelyn Marsh was contacted. Reached at (415) 555-0132 "
              "after hours."),
        {{"age", "57"}, {"sex", "F"}, {"site", "south clinic"}},
        {{"PT-0018", "TREATED_WITH", "Metformin"}});

    add("PT-0019", "Hypertension management",
        stock("Hypertension managed conservatively with diet adjustment. Message left for "
              "harriet.blum@mailhost.example. Seen with Nikolai Ferro present."),
        {{"age", "49"}, {"sex", "M"}, {"site", "east clinic"}},
        {{"PT-0019", "HAS_CONDITION", "Hypertension"}});
    add("PT-0020", "Hypertension, nocturnal headaches",
        stock("Recurrent nocturnal headaches each morning; hypertension the suspected driver. "
              "Findings: morning readings elevated. Caregiver reports patient is 92 years old. "
              "Contact 555.412.9096 on file."),
        {{"age", "66"}, {"sex", "F"}, {"site", "north clinic"}},
        {{"PT-0020", "HAS_CONDITION", "Hypertension"}});
    add("PT-0021", "Hypertension",
        stock("Hypertension with renal workup pending. ACCT 5561200 linked for billing."),
        {{"age", "72"}, {"sex", "M"}, {"site", "south clinic"}},
        {{"PT-0021", "HAS_CONDITION", "Hypertension"}});

    add("PT-0022", "Anemia surveillance", stock("Anemia workup unremarkable this cycle."),
        {{"age", "44"},
         {"sex", "F"},
         {"site", "east clinic"},
         {"contact", "scheduling@westclinic.example"}},
        {{"PT-0022", "HAS_CONDITION", "Anemia"}});
    add("PT-0023", "Anemia, fatigue",
        stock("Fatigue and exertional dyspnea accompany anemia; iron studies ordered. Findings: "
              "ferritin low. Sister Imogen Vale assisted with history. Visit logged 2020/11/02."),
        {{"age", "38"}, {"sex", "F"}, {"site", "north clinic"}},
        {{"PT-0023", "HAS_CONDITION", "Anemia"}});
    add("PT-0024", "Anemia follow",
        stock("Anemia monitored annually without transfusion. RECORD #77120345 amended."),
        {{"age", "53"}, {"sex", "M"}, {"site", "south clinic"}},
        {{"PT-0024", "HAS_CONDITION", "Anemia"}});

    add("PT-0025", "Routine wellness check",
        stock("Annual exam unremarkable. Castor Wren listed as emergency contact; alternate "
              "Odette Lindqvist. Prior records from 3/7/2018 requested at (201)555-7301. Copy "
              "forwarded to j.moreno@clinicmail.example under MRN: 90210458."),
        {{"age", "29"}, {"sex", "F"}, {"site", "east clinic"}});
    add("PT-0026", "Immunization update",
        stock("Boosters current. Guardian Percival Huang accompanied; translator Rosalind Mbeki "
              "assisted. Last dose given 12/25/2017, confirmed by phone +1 444 555 2121. "
              "Insurance query sent to n.adeyemi@caretrust.example. Neighbor states patient is "
              "96-years-old."),
        {{"age", "34"}, {"sex", "M"}, {"site", "north clinic"}});
    add("PT-0027", "Nutrition counseling",
        stock("Dietary log maintained. Counselor Thaddeus Korn met with chaperone Beatrix Salo "
              "on 2021-07-09. Pager 312-555-8844 noted for urgent items. Reminder routed to "
              "followup+t9@intake.example."),
        {{"age", "47"}, {"sex", "F"}, {"site", "south clinic"}});
    add("PT-0028", "Physical therapy progress",
        stock("Range of motion improving. Therapist Lucinda Farrow supervised; aide Emmett Vogel "
              "observed on 2018-01-30. Front desk 773.555.2209 holds equipment requests. Summary "
              "archived by rsv_admin@records.example.org."),
        {{"age", "59"}, {"sex", "M"}, {"site", "east clinic"}});
    add("PT-0029", "Travel consult",
        stock("Prophylaxis arranged for itinerary. Interpreter Jasper Nkemdirim joined; "
              "witnesses Ottilie Brandt and Silas Whitacre signed consent on 05/14/2019. "
              "Overseas line +44 201 555 0107 verified."),
        {{"age", "41"}, {"sex", "F"}, {"site", "north clinic"}});
    add("PT-0030", "Care coordination",
        stock("Home services continue. Case managers Marguerite Osei and Florian Delacroix "
              "rotate weekly; pharmacist Priya Ramanathan and courier Conrad Vesely deliver "
              "supplies. Visits on 2017/06/21 and 9/9/2019 logged; next window 2022-02-18. "
              "Neighbor Hector Abernathy holds spare key."),
        {{"age", "76"}, {"sex", "M"}, {"site", "south clinic"}});

    // Comorbidity triples tie every record into one association component.
    static const std::vector<std::string> pool = {
        "chronic kidney disease", "atrial fibrillation", "osteoarthritis", "copd",
        "gerd",                   "obesity",             "asthma",         "depression"};
    for (size_t i = 0; i < recs.size(); ++i) {
        recs[i].triples.push_back({recs[i].uid, "HAS_COMORBIDITY", pool[i % pool.size()]});
        recs[i].triples.push_back({recs[i].uid, "HAS_COMORBIDITY", pool[(i + 3) % pool.size()]});
    }
    return recs;
}

const std::vector<std::string>& person_names() {
    static const std::vector<std::string> names = {
        "Daniel Okafor",     "Evelyn Marsh",      "Nikolai Ferro",    "Imogen Vale",
        "Castor Wren",       "Odette Lindqvist",  "Percival Huang",   "Rosalind Mbeki",
        "Thaddeus Korn",     "Beatrix Salo",      "Lucinda Farrow",   "Emmett Vogel",
        "Jasper Nkemdirim",  "Ottilie Brandt",    "Silas Whitacre",   "Marguerite Osei",
        "Florian Delacroix", "Priya Ramanathan",  "Conrad Vesely",    "Hector Abernathy"};
    return names;
}

const std::vector<std::string>& pii_tokens() {
    static const std::vector<std::string> tokens = [] {
        std::vector<std::string> t = person_names();
        const std::vector<std::string> rest = {
            // dates
            "2019-03-14", "2020/11/02", "3/7/2018", "12/25/2017", "2021-07-09",
            "2018-01-30", "05/14/2019", "2017/06/21", "9/9/2019", "2022-02-18",
            // phones
            "555-301-7788", "(415) 555-0132", "555.412.9096", "(201)555-7301",
            "+1 444 555 2121", "312-555-8844", "773.555.2209", "+44 201 555 0107",
            // emails
            "harriet.blum@mailhost.example", "j.moreno@clinicmail.example",
            "scheduling@westclinic.example", "n.adeyemi@caretrust.example",
            "followup+t9@intake.example", "rsv_admin@records.example.org",
            // record-number digit runs
            "4482913", "90210458", "77120345", "5561200",
            // ages past the redaction cutoff
            "92 years old", "96-years-old"};
        t.insert(t.end(), rest.begin(), rest.end());
        return t;
    }();
    return tokens;
}

std::string corpus_jsonl(const std::vector<RecSpec>& recs) {
    std::string out;
    for (const auto& rec : recs) {
        nlohmann::ordered_json j;
        j["uid"] = rec.uid;
        j["title"] = rec.title;
        j["body"] = rec.body;
        if (!rec.fields.empty()) {
            nlohmann::ordered_json fields = nlohmann::ordered_json::object();
            for (const auto& [k, v] : rec.fields) fields[k] = v;
            j["fields"] = std::move(fields);
        }
        nlohmann::ordered_json triples = nlohmann::ordered_json::array();
        for (const auto& t : rec.triples)
            triples.push_back(nlohmann::ordered_json::array({t[0], t[1], t[2]}));
        j["triples"] = std::move(triples);
        out += j.dump() + "\n";
    }
    return out;
}

std::string queries_jsonl() {
    static const std::vector<std::array<std::string, 3>> queries = {
        {"q-a1", "Erythrodermia pruritus", "desquamation"},
        {"q-a2", "Thyrotoxicosis palpitations", "tremor"},
        {"q-a3", "Sarcoidosis granuloma", "uveitis"},
        {"q-a4", "Amyloidosis proteinuria", "neuropathy"},
        {"q-b1", "Insomnia bruxism", "apnea"},
        {"q-b2", "Vertigo tinnitus", "nystagmus"},
        {"q-b3", "Dysphagia odynophagia", "regurgitation"},
        {"q-b4", "Claudication cyanosis", "pallor"},
        {"q-e1", "Lisinopril cough", "persistent dry cough"},
        {"q-e2", "Metformin lactic acidosis", "metformin admission"},
        {"q-h1", "Hypertension nocturnal headaches", "recurrent morning hypertension"},
        {"q-h2", "Anemia fatigue", "exertional dyspnea"}};
    std::string out;
    for (const auto& [id, title, abstract] : queries) {
        nlohmann::ordered_json j;
        j["query_id"] = id;
        j["title"] = title;
        j["abstract"] = abstract;
        out += j.dump() + "\n";
    }
    return out;
}

std::string qrels_tsv() {
    return "q-a1\tPT-0001\t2\n"
           "q-a2\tPT-0002\t2\n"
           "q-a3\tPT-0003\t2\n"
           "q-a4\tPT-0004\t2\n"
           "q-b1\tPT-0009\t2\n"
           "q-b2\tPT-0010\t2\n"
           "q-b3\tPT-0011\t2\n"
           "q-b4\tPT-0012\t2\n"
           "q-e1\tPT-0017\t2\n"
           "q-e2\tPT-0018\t2\n"
           "q-h1\tPT-0020\t1\n"
           "q-h2\tPT-0023\t1\n";
}

std::string lines_file(const std::string& header, const std::vector<std::string>& lines) {
    std::string out = "# " + header + "\n";
    for (const auto& line : lines) out += line + "\n";
    return out;
}

// Query terms are the fixture's load-bearing vocabulary: each may appear
// only in its designated records, or ranking guarantees silently erode.
void check_term_placement(const std::vector<RecSpec>& recs) {
    static const std::vector<std::pair<std::string, std::set<std::string>>> placement = {
        {"erythrodermia", {"PT-0001"}},
        {"pruritus", {"PT-0001", "PT-0005"}},
        {"desquamation", {"PT-0001", "PT-0005"}},
        {"thyrotoxicosis", {"PT-0002"}},
        {"palpitations", {"PT-0002", "PT-0006"}},
        {"tremor", {"PT-0002", "PT-0006"}},
        {"sarcoidosis", {"PT-0003"}},
        {"granuloma", {"PT-0003", "PT-0007"}},
        {"uveitis", {"PT-0003", "PT-0007"}},
        {"amyloidosis", {"PT-0004"}},
        {"proteinuria", {"PT-0004", "PT-0008"}},
        {"neuropathy", {"PT-0004", "PT-0008"}},
        {"insomnia", {"PT-0009", "PT-0013"}},
        {"bruxism", {"PT-0009", "PT-0013"}},
        {"apnea", {"PT-0009", "PT-0013"}},
        {"vertigo", {"PT-0010", "PT-0014"}},
        {"tinnitus", {"PT-0010", "PT-0014"}},
        {"nystagmus", {"PT-0010", "PT-0014"}},
        {"dysphagia", {"PT-0011", "PT-0015"}},
        {"odynophagia", {"PT-0011", "PT-0015"}},
        {"regurgitation", {"PT-0011", "PT-0015"}},
        {"claudication", {"PT-0012", "PT-0016"}},
        {"cyanosis", {"PT-0012", "PT-0016"}},
        {"pallor", {"PT-0012", "PT-0016"}},
        {"lisinopril", {"PT-0017"}},
        {"cough", {"PT-0017"}},
        {"persistent", {"PT-0017"}},
        {"dry", {"PT-0017"}},
        {"metformin", {"PT-0018"}},
        {"lactic", {"PT-0018"}},
        {"acidosis", {"PT-0018"}},
        {"admission", {"PT-0018"}},
        {"hypertension", {"PT-0019", "PT-0020", "PT-0021"}},
        {"nocturnal", {"PT-0020"}},
        {"headaches", {"PT-0020"}},
        {"recurrent", {"PT-0020"}},
        {"morning", {"PT-0020"}},
        {"anemia", {"PT-0022", "PT-0023", "PT-0024"}},
        {"fatigue", {"PT-0023"}},
        {"exertional", {"PT-0023"}},
        {"dyspnea", {"PT-0023"}}};
    std::map<std::string, std::set<std::string>> found;
    for (const auto& rec : recs) {
        std::string text = rec.title + " " + rec.body;
        for (const auto& [k, v] : rec.fields) text += " " + v;
        for (const auto& token : tokenize(text)) found[token].insert(rec.uid);
    }
    for (const auto& [term, allowed] : placement) {
        const auto it = found.find(term);
        if (it == found.end()) throw Error("fixture term missing from corpus: " + term);
        if (it->second != allowed) {
            std::string got;
            for (const auto& uid : it->second) got += uid + " ";
            throw Error("fixture term " + term + " placed in wrong records: " + got);
        }
    }
}

void check_pii_seeding(const std::vector<RecSpec>& recs) {
    for (const auto& token : pii_tokens()) {
        bool present = false;
        for (const auto& rec : recs) {
            std::string text = rec.title + " " + rec.body;
            for (const auto& [k, v] : rec.fields) text += " " + v;
            if (text.find(token) != std::string::npos) {
                present = true;
                break;
            }
        }
        if (!present) throw Error("seeded token missing from corpus: " + token);
    }
}

std::string assoc_graph_json(const AssociationGraph& assoc) {
    nlohmann::ordered_json j;
    j["record_nodes"] = assoc.record_nodes;
    j["edge_count"] = assoc.edge_count();
    nlohmann::ordered_json adjacency = nlohmann::ordered_json::object();
    for (const auto& [node, neighbors] : assoc.adjacency) adjacency[node] = neighbors;
    j["adjacency"] = std::move(adjacency);
    return j.dump(2) + "\n";
}

std::string workload_prefix_json(const AssociationGraph& assoc) {
    const WorkloadParams params;  // defaults, seed 42
    const auto trace = generate_workload(assoc, params);
    nlohmann::ordered_json j;
    j["seed"] = params.seed;
    j["warmup"] = params.warmup;
    j["test"] = params.test;
    nlohmann::ordered_json first = nlohmann::ordered_json::array();
    for (size_t i = 0; i < 20 && i < trace.size(); ++i) first.push_back(trace[i].node_id);
    j["first_nodes"] = std::move(first);
    return j.dump(2) + "\n";
}

std::string cache_sim_json(const AssociationGraph& assoc) {
    const WorkloadParams params;
    const TierConfig cfg;
    const auto trace = generate_workload(assoc, params);
    const CacheStats stats = simulate(trace, cfg, assoc);
    nlohmann::ordered_json j;
    j["l1_rate"] = stats.rate(stats.l1_hits);
    j["l2_rate"] = stats.rate(stats.l2_hits);
    j["l3_rate"] = stats.rate(stats.l3_hits);
    j["miss_rate"] = stats.rate(stats.misses);
    j["mean_latency_ms"] = stats.mean_latency_ms(cfg);
    j["baseline_latency_ms"] = cfg.miss_ms;
    j["reduction"] = stats.latency_reduction(cfg);
    return j.dump(2) + "\n";
}

std::string embed_pairs_json() {
    const HashingEmbedder embedder(256);
    static const std::vector<std::pair<std::string, std::string>> pairs = {
        {"pruritus desquamation", "erythrodermia pruritus desquamation"},
        {"insomnia bruxism apnea", "insomnia bruxism apnea"},
        {"hypertension", "anemia"},
        {"metformin admission", "lisinopril cough"},
        {"", "care team"},
        {"patient presented for clinical review", "plan discussed with care team"}};
    nlohmann::ordered_json out = nlohmann::ordered_json::array();
    for (const auto& [a, b] : pairs) {
        nlohmann::ordered_json j;
        j["a"] = a;
        j["b"] = b;
        j["cosine"] = static_cast<double>(kernels::cosine(embedder.embed(a), embedder.embed(b)));
        out.push_back(std::move(j));
    }
    return out.dump(2) + "\n";
}

}  // namespace

const std::string& FixtureSet::content(const std::string& rel_path) const {
    for (const auto& [path, content] : files)
        if (path == rel_path) return content;
    throw Error("no such fixture file: " + rel_path);
}

FixtureSet generate_fixtures() {
    const std::vector<RecSpec> recs = record_specs();
    check_term_placement(recs);
    check_pii_seeding(recs);

    FixtureSet fs;
    const std::string corpus_text = corpus_jsonl(recs);
    fs.files.emplace_back("corpus.jsonl", corpus_text);
    fs.files.emplace_back("queries.jsonl", queries_jsonl());
    fs.files.emplace_back("qrels.tsv", qrels_tsv());
    fs.files.emplace_back("person_names.txt",
                          lines_file("fixture person lexicon", person_names()));
    fs.files.emplace_back("pii_tokens.txt",
                          lines_file("seeded identifiers, one per line", pii_tokens()));

    const Corpus corpus = ingest_corpus_text(corpus_text, Modality::Text);
    const AssociationGraph assoc = build_association_graph(corpus);
    fs.files.emplace_back("derived/assoc_graph.json", assoc_graph_json(assoc));
    fs.files.emplace_back("derived/workload_prefix.json", workload_prefix_json(assoc));
    fs.files.emplace_back("derived/cache_sim.json", cache_sim_json(assoc));
    fs.files.emplace_back("derived/embed_pairs.json", embed_pairs_json());
    return fs;
}

void write_fixtures(const FixtureSet& fs, const std::string& dir) {
    for (const auto& [rel, content] : fs.files) {
        const std::filesystem::path path = std::filesystem::path(dir) / rel;
        std::filesystem::create_directories(path.parent_path());
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write fixture " + path.string());
        out << content;
    }
}

std::vector<std::string> verify_fixtures(const std::string& dir) {
    const FixtureSet fs = generate_fixtures();
    std::vector<std::string> drifted;
    for (const auto& [rel, content] : fs.files) {
        const std::filesystem::path path = std::filesystem::path(dir) / rel;
        std::ifstream in(path, std::ios::binary);
        if (!in) {
            drifted.push_back(rel);
            continue;
        }
        std::ostringstream ss;
        ss << in.rdbuf();
        if (ss.str() != content) drifted.push_back(rel);
    }
    return drifted;
}

}  // namespace hyfed
