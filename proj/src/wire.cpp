#include "hyfed/wire.hpp"

#include <array>

#include "hyfed/common.hpp"

namespace hyfed {

const char* msg_type_name(MsgType t) {
    switch (t) {
        case MsgType::RetrieveRequest: return "RetrieveRequest";
        case MsgType::RetrieveResponse: return "RetrieveResponse";
        case MsgType::Register: return "Register";
        case MsgType::Ack: return "Ack";
        case MsgType::Error: return "Error";
    }
    return "?";
}

MsgType parse_msg_type(const std::string& s) {
    static const std::array<MsgType, 5> all = {MsgType::RetrieveRequest, MsgType::RetrieveResponse,
                                               MsgType::Register, MsgType::Ack, MsgType::Error};
    for (MsgType t : all)
        if (s == msg_type_name(t)) return t;
    throw WireError("unknown envelope type '" + s + "'");
}

bool Envelope::operator==(const Envelope& other) const {
    return version == other.version && type == other.type && query_id == other.query_id &&
           payload == other.payload;
}

std::string find_forbidden_field(const nlohmann::ordered_json& value) {
    static const std::array<const char*, 4> forbidden = {"body", "fields", "triples", "mapping"};
    if (value.is_object()) {
        for (auto it = value.begin(); it != value.end(); ++it) {
            for (const char* f : forbidden)
                if (it.key() == f) return it.key();
            std::string nested = find_forbidden_field(it.value());
            if (!nested.empty()) return nested;
        }
    } else if (value.is_array()) {
        for (const auto& item : value) {
            std::string nested = find_forbidden_field(item);
            if (!nested.empty()) return nested;
        }
    }
    return "";
}

std::string encode(const Envelope& env) {
    const std::string bad = find_forbidden_field(env.payload);
    if (!bad.empty()) throw WireError("raw-record field on wire: " + bad);
    nlohmann::ordered_json j;
    j["version"] = env.version;
    j["type"] = msg_type_name(env.type);
    j["query_id"] = env.query_id;
    j["payload"] = env.payload;
    return j.dump() + "\n";
}

Envelope decode_line(std::string_view line) {
    while (!line.empty() && (line.back() == '\n' || line.back() == '\r'))
        line.remove_suffix(1);
    nlohmann::ordered_json j;
    try {
        j = nlohmann::ordered_json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw WireError(std::string("malformed envelope: ") + e.what());
    }
    if (!j.is_object()) throw WireError("envelope must be a JSON object");
    if (!j.contains("version") || !j["version"].is_number_integer())
        throw WireError("envelope missing integer version");
    if (!j.contains("type") || !j["type"].is_string())
        throw WireError("envelope missing type");
    if (!j.contains("query_id") || !j["query_id"].is_string())
        throw WireError("envelope missing query_id");
    if (!j.contains("payload") || !j["payload"].is_object())
        throw WireError("envelope missing payload object");

    Envelope env;
    env.version = j["version"].get<int>();
    if (env.version != kWireVersion)
        throw WireError("version mismatch: got " + std::to_string(env.version) + ", expected " +
                        std::to_string(kWireVersion));
    env.type = parse_msg_type(j["type"].get<std::string>());
    env.query_id = j["query_id"].get<std::string>();
    env.payload = j["payload"];

    const std::string bad = find_forbidden_field(env.payload);
    if (!bad.empty()) throw WireError("raw-record field on wire: " + bad);
    return env;
}

std::vector<Envelope> decode_stream(std::string_view buffer) {
    std::vector<Envelope> out;
    size_t pos = 0;
    while (pos < buffer.size()) {
        const size_t nl = buffer.find('\n', pos);
        if (nl == std::string_view::npos)
            throw WireError("truncated envelope at byte " + std::to_string(pos));
        out.push_back(decode_line(buffer.substr(pos, nl - pos)));
        pos = nl + 1;
    }
    return out;
}

}  // namespace hyfed
