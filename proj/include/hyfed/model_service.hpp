#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "hyfed/models.hpp"

namespace hyfed {

struct ServiceConfig {
    std::string url;  // e.g. http://127.0.0.1:8900
    int timeout_ms = 10000;
};

// Shared transport for all served model tasks: POST /model with
// {"task": ..., "inputs": [...]}, expecting {"outputs": [...]} back.
// At most one retry per request; transport failures raise BackendError
// naming the service URL. Stateless, safe for concurrent callers.
class ModelServiceClient {
public:
    explicit ModelServiceClient(ServiceConfig cfg) : cfg_(std::move(cfg)) {}

    nlohmann::ordered_json call(const std::string& task,
                                const nlohmann::ordered_json& inputs) const;

    const std::string& url() const { return cfg_.url; }

private:
    ServiceConfig cfg_;
};

class ServiceEmbedder : public Embedder {
public:
    ServiceEmbedder(ServiceConfig cfg, size_t dim) : client_(std::move(cfg)), dim_(dim) {}
    size_t dim() const override { return dim_; }
    std::vector<float> embed(std::string_view text) const override;

private:
    ModelServiceClient client_;
    size_t dim_;
};

class ServiceReranker : public Reranker {
public:
    explicit ServiceReranker(ServiceConfig cfg) : client_(std::move(cfg)) {}
    // Scores are clamped to [0,1] (out-of-range logged); NaN is an error.
    double score(std::string_view query, std::string_view doc) const override;

private:
    ModelServiceClient client_;
};

class ServiceNer : public Ner {
public:
    explicit ServiceNer(ServiceConfig cfg) : client_(std::move(cfg)) {}
    std::vector<std::string> extract(std::string_view text) const override;

private:
    ModelServiceClient client_;
};

class ServiceSummarizer : public Summarizer {
public:
    explicit ServiceSummarizer(ServiceConfig cfg) : client_(std::move(cfg)) {}
    std::string draft(std::string_view view_text, std::string_view query_text) const override;

private:
    ModelServiceClient client_;
};

}  // namespace hyfed
