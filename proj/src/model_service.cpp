#include "hyfed/model_service.hpp"

#include <cmath>

#include <httplib.h>

#include "hyfed/common.hpp"

namespace hyfed {

nlohmann::ordered_json ModelServiceClient::call(const std::string& task,
                                                const nlohmann::ordered_json& inputs) const {
    nlohmann::ordered_json body;
    body["task"] = task;
    body["inputs"] = inputs;
    const std::string payload = body.dump();

    std::string last_error;
    for (int attempt = 0; attempt < 2; ++attempt) {
        httplib::Client client(cfg_.url);
        client.set_connection_timeout(0, cfg_.timeout_ms * 1000);
        client.set_read_timeout(cfg_.timeout_ms / 1000, (cfg_.timeout_ms % 1000) * 1000);
        auto res = client.Post("/model", payload, "application/json");
        if (!res) {
            last_error = "transport error " + httplib::to_string(res.error());
            continue;
        }
        if (res->status != 200) {
            last_error = "http status " + std::to_string(res->status);
            continue;
        }
        nlohmann::ordered_json parsed;
        try {
            parsed = nlohmann::ordered_json::parse(res->body);
        } catch (const nlohmann::json::exception& e) {
            throw BackendError("model service " + cfg_.url + " returned invalid JSON: " +
                               e.what());
        }
        if (!parsed.is_object() || !parsed.contains("outputs") || !parsed["outputs"].is_array())
            throw BackendError("model service " + cfg_.url + " response missing outputs array");
        return parsed["outputs"];
    }
    throw BackendError("model service " + cfg_.url + " unreachable: " + last_error);
}

std::vector<float> ServiceEmbedder::embed(std::string_view text) const {
    const auto outputs = client_.call("embed", nlohmann::ordered_json::array({std::string(text)}));
    if (outputs.size() != 1 || !outputs[0].is_array())
        throw BackendError("embed service " + client_.url() + " returned malformed outputs");
    std::vector<float> vec;
    vec.reserve(outputs[0].size());
    for (const auto& v : outputs[0]) {
        if (!v.is_number()) throw BackendError("embed service returned non-numeric value");
        const double d = v.get<double>();
        if (std::isnan(d)) throw BackendError("embed service returned NaN");
        vec.push_back(static_cast<float>(d));
    }
    if (vec.size() != dim_)
        throw BackendError("embed service dimension mismatch: got " +
                           std::to_string(vec.size()) + ", expected " + std::to_string(dim_));
    return vec;
}

double ServiceReranker::score(std::string_view query, std::string_view doc) const {
    auto pair = nlohmann::ordered_json::array({std::string(query), std::string(doc)});
    const auto outputs = client_.call("rerank", nlohmann::ordered_json::array({pair}));
    if (outputs.size() != 1 || !outputs[0].is_number())
        throw BackendError("rerank service " + client_.url() + " returned malformed outputs");
    const double s = outputs[0].get<double>();
    if (std::isnan(s)) throw BackendError("rerank service returned NaN");
    if (s < 0.0 || s > 1.0)
        HYFED_LOG_WARN("rerank score %f outside [0,1], clamping", s);
    return std::clamp(s, 0.0, 1.0);
}

std::vector<std::string> ServiceNer::extract(std::string_view text) const {
    const auto outputs = client_.call("ner", nlohmann::ordered_json::array({std::string(text)}));
    if (outputs.size() != 1 || !outputs[0].is_array())
        throw BackendError("ner service " + client_.url() + " returned malformed outputs");
    std::vector<std::string> entities;
    for (const auto& e : outputs[0]) {
        if (!e.is_string()) throw BackendError("ner service returned non-string entity");
        entities.push_back(e.get<std::string>());
    }
    return entities;
}

std::string ServiceSummarizer::draft(std::string_view view_text,
                                     std::string_view query_text) const {
    auto pair = nlohmann::ordered_json::array({std::string(view_text), std::string(query_text)});
    const auto outputs = client_.call("summarize", nlohmann::ordered_json::array({pair}));
    if (outputs.size() != 1 || !outputs[0].is_string())
        throw BackendError("summarize service " + client_.url() + " returned malformed outputs");
    return outputs[0].get<std::string>();
}

}  // namespace hyfed
