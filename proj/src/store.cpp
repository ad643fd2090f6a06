#include "hyfed/store.hpp"

#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "hyfed/common.hpp"

namespace hyfed {

namespace {

constexpr const char* kMagic = "HYFED1";
constexpr int kIndexVersion = 1;

nlohmann::ordered_json record_to_json(const PatientRecord& rec) {
    nlohmann::ordered_json j;
    j["uid"] = rec.uid;
    j["title"] = rec.title;
    j["body"] = rec.body;
    nlohmann::ordered_json fields = nlohmann::ordered_json::object();
    for (const auto& [name, value] : rec.fields) fields[name] = value;
    j["fields"] = std::move(fields);
    nlohmann::ordered_json triples = nlohmann::ordered_json::array();
    for (const auto& t : rec.triples)
        triples.push_back(nlohmann::ordered_json::array({t.subject, t.relation, t.object}));
    j["triples"] = std::move(triples);
    return j;
}

PatientRecord record_from_json(const nlohmann::ordered_json& j) {
    PatientRecord rec;
    rec.uid = j.at("uid").get<std::string>();
    rec.title = j.at("title").get<std::string>();
    rec.body = j.at("body").get<std::string>();
    for (auto it = j.at("fields").begin(); it != j.at("fields").end(); ++it)
        rec.fields.emplace_back(it.key(), it.value().get<std::string>());
    for (const auto& t : j.at("triples"))
        rec.triples.push_back(
            {t.at(0).get<std::string>(), t.at(1).get<std::string>(), t.at(2).get<std::string>()});
    return rec;
}

}  // namespace

void save_index(const Corpus& corpus, const std::string& dir) {
    std::filesystem::create_directories(dir);
    nlohmann::ordered_json doc;
    doc["magic"] = kMagic;
    doc["version"] = kIndexVersion;
    doc["modality"] = modality_name(corpus.modality);
    nlohmann::ordered_json records = nlohmann::ordered_json::array();
    for (const auto& rec : corpus.records) records.push_back(record_to_json(rec));
    doc["records"] = std::move(records);

    const std::string path = (std::filesystem::path(dir) / "index.json").string();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write index file " + path);
    out << doc.dump(2) << "\n";
}

Corpus load_index(const std::string& dir) {
    const std::string path = (std::filesystem::path(dir) / "index.json").string();
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open index file " + path);
    nlohmann::ordered_json doc;
    try {
        doc = nlohmann::ordered_json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("index file " + path + " is not valid JSON: " + e.what());
    }
    if (!doc.is_object() || !doc.contains("magic") || doc["magic"] != kMagic)
        throw ParseError("index file " + path + " has wrong magic (expected HYFED1)");
    if (!doc.contains("version") || doc["version"] != kIndexVersion)
        throw ParseError("index file " + path + " has unsupported version");

    std::vector<PatientRecord> records;
    try {
        for (const auto& j : doc.at("records")) records.push_back(record_from_json(j));
        return make_corpus(parse_modality(doc.at("modality").get<std::string>()),
                           std::move(records));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("index file " + path + " is malformed: " + e.what());
    }
}

}  // namespace hyfed
