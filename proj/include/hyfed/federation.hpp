#pragma once

#include <atomic>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "hyfed/cache.hpp"
#include "hyfed/corpus.hpp"
#include "hyfed/kg_retrieval.hpp"
#include "hyfed/models.hpp"
#include "hyfed/privacy.hpp"
#include "hyfed/sql_retrieval.hpp"
#include "hyfed/text_index.hpp"
#include "hyfed/wire.hpp"

namespace hyfed {

// Accumulates every byte that crosses a client/server boundary so privacy
// audits can scan the full exchange.
class TranscriptSink {
public:
    void write(std::string_view bytes);
    std::string bytes() const;
    void save(const std::string& path) const;

private:
    mutable std::mutex mu_;
    std::string data_;
};

struct ClientParams {
    std::string client_id;
    Modality modality = Modality::Text;
    TextParams text;
    KgParams kg;
    SqlParams sql;
    PrivacyConfig privacy;
    TierConfig cache;
};

// One data holder: local retrieval for its modality, summarize+mask, and a
// tiered response cache. Raw records never leave this object; only masked
// summaries and keyed uid hashes appear in its replies.
class FederatedClient {
public:
    FederatedClient(ClientParams params, Corpus corpus, ModelSet models);

    const std::string& client_id() const { return params_.client_id; }
    Modality modality() const { return params_.modality; }

    Envelope make_register() const;

    // RetrieveRequest -> RetrieveResponse; anything else or any failure ->
    // Error envelope. Backend exception text is not forwarded verbatim:
    // service errors keep their message (infrastructure only), everything
    // else is replaced by a generic message so record content cannot leak.
    Envelope handle(const Envelope& request);

private:
    ScoredCandidates retrieve(const Query& query, size_t top_k, std::optional<double> alpha,
                              std::optional<double> tau) const;
    nlohmann::ordered_json build_response(const Query& query, size_t top_k,
                                          std::optional<double> alpha, std::optional<double> tau,
                                          std::string* top_uid);

    ClientParams params_;
    Corpus corpus_;
    ModelSet models_;
    TextIndex text_index_;
    RelationalStore store_;
    PropertyGraph graph_;
    AssociationGraph assoc_;
    std::vector<std::string> known_uids_;
    std::mutex mu_;
    TieredCache cache_;
};

// One request line in, one response line out. Implementations carry the
// transport; every message crosses encode/decode as real bytes.
class ClientLink {
public:
    virtual ~ClientLink() = default;
    virtual std::string transact(const std::string& line) = 0;
};

class InProcessLink : public ClientLink {
public:
    InProcessLink(FederatedClient& client, std::shared_ptr<TranscriptSink> transcript);
    std::string transact(const std::string& line) override;

private:
    FederatedClient& client_;
    std::shared_ptr<TranscriptSink> transcript_;
};

// Owns a connected stream socket; transact is serialized per link.
class SocketLink : public ClientLink {
public:
    SocketLink(int fd, int timeout_ms, std::shared_ptr<TranscriptSink> transcript = nullptr);
    ~SocketLink() override;
    SocketLink(const SocketLink&) = delete;
    SocketLink& operator=(const SocketLink&) = delete;

    std::string transact(const std::string& line) override;

private:
    int fd_;
    int timeout_ms_;
    std::shared_ptr<TranscriptSink> transcript_;
    std::string buffer_;
    std::mutex mu_;
};

struct ResultEntry {
    std::string uid_hash;
    double score = 0.0;
    std::string summary_text;
    std::map<std::string, double> signals;
};

struct ClientResponse {
    std::string client_id;
    std::string modality;
    std::vector<ResultEntry> results;
};

ClientResponse parse_response(const Envelope& env);

struct FailedClient {
    std::string client_id;
    std::string error;
};

struct FusedEntry {
    std::string uid_hash;
    std::string client_id;
    double fused_score = 0.0;
    std::string summary_text;
};

struct ClientSection {
    std::string client_id;
    std::string modality;
    bool failed = false;
    std::string error;
    std::vector<ResultEntry> results;
};

struct GlobalReport {
    std::string query_id;
    std::vector<ClientSection> sections;  // client_id ascending
    std::vector<FusedEntry> fused;        // fused_score descending, truncated
    std::string generation;

    nlohmann::ordered_json to_json() const;
    static GlobalReport from_json(const nlohmann::ordered_json& j);
};

using Generator = std::function<std::string(const std::vector<FusedEntry>&)>;

// Per-client min-max score normalization (constant lists map to 1.0), merge
// sorted by (normalized score desc, client_id asc, uid_hash asc), truncated
// to k_global. Generation defaults to attributed concatenation of the fused
// entries' summaries. No successful responses at all is an error.
GlobalReport aggregate(const std::vector<ClientResponse>& responses,
                       const std::vector<FailedClient>& failures, size_t k_global,
                       const Generator& generator = {});

struct ServerParams {
    size_t k_global = 10;
    int client_timeout_ms = 30000;
};

Envelope make_retrieve_request(const Query& query, size_t top_k, const std::string& query_id,
                               std::optional<double> alpha = {}, std::optional<double> tau = {});

// Roster plus query fan-out. Transport-agnostic: registration and queries
// arrive as serialized lines, replies leave as serialized lines.
class FederationServer {
public:
    explicit FederationServer(ServerParams params) : params_(params) {}

    // Handles one Register line; on success the link joins the roster and
    // the reply is an Ack. Version mismatch, duplicate client_id, or a
    // malformed line yield an Error reply (callers should close then).
    std::string handle_register(const std::string& line, std::shared_ptr<ClientLink> link);

    size_t roster_size() const;
    std::vector<std::string> roster() const;  // client ids, registration order

    // Fans the query out to every registered client, waits for each reply,
    // and aggregates. Clients that fail or answer with Error envelopes are
    // marked in the report; they do not abort the query.
    GlobalReport run_query(const Query& query, size_t top_k, const std::string& query_id);

    // Querier entry point: a RetrieveRequest line is answered with an Ack
    // line whose payload is the GlobalReport (Error line on failure).
    std::string handle_query_line(const std::string& line);

private:
    ServerParams params_;
    mutable std::mutex mu_;
    std::vector<std::pair<std::string, std::shared_ptr<ClientLink>>> roster_;
};

// In-process handshake: encodes the client's Register envelope, passes the
// bytes through the server, records both lines in the transcript, returns
// the decoded reply. Error replies are thrown.
Envelope connect_local(FederationServer& server, FederatedClient& client,
                       std::shared_ptr<TranscriptSink> transcript);

// Newline-delimited JSON over TCP. One thread per connection: a connection
// opening with Register stays alive as that client's link; one opening with
// RetrieveRequest is answered and closed.
class TcpServer {
public:
    TcpServer(FederationServer& core, std::string host, int port,
              std::shared_ptr<TranscriptSink> transcript = nullptr);
    ~TcpServer();

    void start();  // binds, listens, spawns the accept loop
    void stop();
    int port() const { return port_; }  // actual port (useful with port 0)

private:
    void accept_loop();
    void handle_connection(int fd);

    FederationServer& core_;
    std::string host_;
    int port_;
    std::shared_ptr<TranscriptSink> transcript_;
    int listen_fd_ = -1;
    std::atomic<bool> running_{false};
    std::thread accept_thread_;
    std::mutex workers_mu_;
    std::vector<std::thread> workers_;
};

// Client main loop for socket mode: connect, register, then answer
// RetrieveRequests until the server closes the connection. Throws on a
// rejected registration.
void run_client_loop(FederatedClient& client, const std::string& host, int port, int timeout_ms);

// Querier: sends one RetrieveRequest and returns the server's GlobalReport.
GlobalReport query_server(const std::string& host, int port, const Query& query, size_t top_k,
                          const std::string& query_id, int timeout_ms);

}  // namespace hyfed
