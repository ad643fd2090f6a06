#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace hyfed {

inline constexpr int kWireVersion = 1;

enum class MsgType { RetrieveRequest, RetrieveResponse, Register, Ack, Error };

const char* msg_type_name(MsgType t);
MsgType parse_msg_type(const std::string& s);

// One protocol message: a single JSON line. Payloads must never carry the
// raw-record field names "body", "fields", "triples", or "mapping" at any
// nesting depth; encode and decode both enforce this.
struct Envelope {
    int version = kWireVersion;
    MsgType type = MsgType::Error;
    std::string query_id;
    nlohmann::ordered_json payload = nlohmann::ordered_json::object();

    bool operator==(const Envelope& other) const;
};

// Serialized JSON object terminated by '\n'.
std::string encode(const Envelope& env);

// Parses one line (terminator optional). Throws WireError on malformed
// JSON, wrong version, unknown type, or a forbidden field.
Envelope decode_line(std::string_view line);

// Splits a buffer into newline-terminated frames and decodes each; a
// trailing unterminated fragment is an error naming its byte offset.
std::vector<Envelope> decode_stream(std::string_view buffer);

// Name of the first forbidden key found anywhere in the value, or empty.
std::string find_forbidden_field(const nlohmann::ordered_json& value);

}  // namespace hyfed
