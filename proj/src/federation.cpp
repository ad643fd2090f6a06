#include "hyfed/federation.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>

#include <arpa/inet.h>
#include <netdb.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include "hyfed/common.hpp"

namespace hyfed {

void TranscriptSink::write(std::string_view bytes) {
    std::lock_guard<std::mutex> lock(mu_);
    data_.append(bytes);
}

std::string TranscriptSink::bytes() const {
    std::lock_guard<std::mutex> lock(mu_);
    return data_;
}

void TranscriptSink::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write transcript file " + path);
    out << bytes();
}

FederatedClient::FederatedClient(ClientParams params, Corpus corpus, ModelSet models)
    : params_(std::move(params)),
      corpus_(std::move(corpus)),
      models_(std::move(models)),
      cache_(params_.cache) {
    if (!models_.embedder || !models_.reranker)
        throw ConfigError("client " + params_.client_id + " needs an embedder and a reranker");
    switch (params_.modality) {
        case Modality::Text:
            text_index_ = TextIndex(corpus_, *models_.embedder);
            break;
        case Modality::Sql:
            store_ = RelationalStore(corpus_);
            break;
        case Modality::Kg:
            graph_ = build_graph(corpus_);
            break;
    }
    if (!models_.ner && params_.modality != Modality::Text)
        models_.ner = std::make_shared<DictionaryNer>(corpus_entity_names(corpus_));
    assoc_ = build_association_graph(corpus_);
    for (const auto& rec : corpus_.records) known_uids_.push_back(rec.uid);
    cache_.init_hotspots(assoc_, params_.cache.hotspot_size);
}

Envelope FederatedClient::make_register() const {
    Envelope env;
    env.type = MsgType::Register;
    env.query_id = "register-" + params_.client_id;
    env.payload["client_id"] = params_.client_id;
    env.payload["modality"] = modality_name(params_.modality);
    return env;
}

ScoredCandidates FederatedClient::retrieve(const Query& query, size_t top_k,
                                           std::optional<double> alpha,
                                           std::optional<double> tau) const {
    switch (params_.modality) {
        case Modality::Text: {
            TextParams p = params_.text;
            p.k = top_k;
            if (alpha) p.alpha = *alpha;
            return retrieve_text(text_index_, query, p, *models_.embedder, *models_.reranker);
        }
        case Modality::Sql: {
            SqlParams p = params_.sql;
            p.k = top_k;
            return retrieve_sql(store_, query, *models_.ner, *models_.embedder, *models_.reranker,
                                p);
        }
        case Modality::Kg: {
            KgParams p = params_.kg;
            p.k = top_k;
            if (alpha) p.alpha = *alpha;
            if (tau) p.tau = *tau;
            return retrieve_kg(graph_, query, *models_.ner, *models_.reranker, p).candidates;
        }
    }
    throw Error("unreachable modality");
}

nlohmann::ordered_json FederatedClient::build_response(const Query& query, size_t top_k,
                                                       std::optional<double> alpha,
                                                       std::optional<double> tau,
                                                       std::string* top_uid) {
    const ScoredCandidates candidates = retrieve(query, top_k, alpha, tau);
    if (top_uid) *top_uid = candidates.empty() ? std::string() : candidates.front().uid;

    std::vector<std::string> query_entities;
    if (models_.ner) query_entities = models_.ner->extract(query.text());

    std::vector<SummarizeInput> inputs;
    inputs.reserve(candidates.size());
    for (const auto& c : candidates) inputs.push_back({c.uid, c.view, c.score});
    const std::vector<Summary> summaries =
        summarize(inputs, query, params_.modality, params_.privacy, *models_.embedder,
                  query_entities, known_uids_, models_.summarizer.get());

    nlohmann::ordered_json payload;
    payload["client_id"] = params_.client_id;
    payload["modality"] = modality_name(params_.modality);
    nlohmann::ordered_json results = nlohmann::ordered_json::array();
    for (size_t i = 0; i < candidates.size(); ++i) {
        nlohmann::ordered_json r;
        r["uid_hash"] = summaries[i].patient_uid_hash;
        r["score"] = candidates[i].score;
        r["summary_text"] = summaries[i].text;
        nlohmann::ordered_json signals = nlohmann::ordered_json::object();
        for (const auto& [name, value] : candidates[i].signals) signals[name] = value;
        r["signals"] = std::move(signals);
        results.push_back(std::move(r));
    }
    payload["results"] = std::move(results);
    return payload;
}

Envelope FederatedClient::handle(const Envelope& request) {
    auto error_reply = [&request](const std::string& message) {
        Envelope env;
        env.type = MsgType::Error;
        env.query_id = request.query_id;
        env.payload["message"] = message;
        return env;
    };
    if (request.type != MsgType::RetrieveRequest)
        return error_reply("client expects RetrieveRequest, got " +
                           std::string(msg_type_name(request.type)));
    try {
        Query query;
        query.title = request.payload.value("title", "");
        query.abstract_text = request.payload.value("abstract", "");
        if (!query.valid()) return error_reply("empty query");
        const int64_t top_k_raw = request.payload.value("top_k", int64_t{0});
        if (top_k_raw < 1) return error_reply("top_k must be >= 1");
        const size_t top_k = static_cast<size_t>(top_k_raw);
        std::optional<double> alpha;
        std::optional<double> tau;
        if (request.payload.contains("alpha")) alpha = request.payload["alpha"].get<double>();
        if (request.payload.contains("tau")) tau = request.payload["tau"].get<double>();

        std::lock_guard<std::mutex> lock(mu_);
        const CacheKey key = CacheKey::from_query(query.text(), params_.modality, top_k);
        const LookupResult hit = cache_.lookup(key);
        nlohmann::ordered_json payload;
        if (hit.value.has_value()) {
            payload = nlohmann::ordered_json::parse(*hit.value);
        } else {
            std::string top_uid;
            payload = build_response(query, top_k, alpha, tau, &top_uid);
            cache_.admit(key, payload.dump(), top_uid, &assoc_);
        }
        Envelope env;
        env.type = MsgType::RetrieveResponse;
        env.query_id = request.query_id;
        env.payload = std::move(payload);
        return env;
    } catch (const BackendError& e) {
        return error_reply(e.what());
    } catch (const std::exception&) {
        return error_reply("internal retrieval error on client " + params_.client_id);
    }
}

InProcessLink::InProcessLink(FederatedClient& client, std::shared_ptr<TranscriptSink> transcript)
    : client_(client), transcript_(std::move(transcript)) {}

std::string InProcessLink::transact(const std::string& line) {
    if (transcript_) transcript_->write(line);
    const Envelope request = decode_line(line);
    const std::string reply = encode(client_.handle(request));
    if (transcript_) transcript_->write(reply);
    return reply;
}

namespace {

void write_all(int fd, std::string_view data) {
    size_t done = 0;
    while (done < data.size()) {
        const ssize_t n = ::send(fd, data.data() + done, data.size() - done, MSG_NOSIGNAL);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw Error(std::string("socket write failed: ") + std::strerror(errno));
        }
        done += static_cast<size_t>(n);
    }
}

// Reads until '\n'; keeps any bytes after it in `buffer` for the next call.
// Empty optional on orderly EOF before any byte of a new line.
std::optional<std::string> read_line(int fd, std::string& buffer, int timeout_ms) {
    while (true) {
        const size_t pos = buffer.find('\n');
        if (pos != std::string::npos) {
            std::string line = buffer.substr(0, pos + 1);
            buffer.erase(0, pos + 1);
            return line;
        }
        struct pollfd pfd{fd, POLLIN, 0};
        const int rc = ::poll(&pfd, 1, timeout_ms);
        if (rc == 0) throw Error("timeout waiting for peer");
        if (rc < 0) {
            if (errno == EINTR) continue;
            throw Error(std::string("poll failed: ") + std::strerror(errno));
        }
        char chunk[4096];
        const ssize_t n = ::recv(fd, chunk, sizeof chunk, 0);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw Error(std::string("socket read failed: ") + std::strerror(errno));
        }
        if (n == 0) {
            if (buffer.empty()) return std::nullopt;
            throw Error("connection closed mid-line");
        }
        buffer.append(chunk, static_cast<size_t>(n));
    }
}

int connect_tcp(const std::string& host, int port, int timeout_ms) {
    struct addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    struct addrinfo* res = nullptr;
    const std::string service = std::to_string(port);
    if (::getaddrinfo(host.c_str(), service.c_str(), &hints, &res) != 0 || !res)
        throw Error("cannot resolve " + host + ":" + service);
    int fd = -1;
    for (struct addrinfo* ai = res; ai; ai = ai->ai_next) {
        fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
        if (fd < 0) continue;
        if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
        ::close(fd);
        fd = -1;
    }
    ::freeaddrinfo(res);
    if (fd < 0) throw Error("cannot connect to " + host + ":" + service);
    struct timeval tv{timeout_ms / 1000, (timeout_ms % 1000) * 1000};
    ::setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);
    return fd;
}

}  // namespace

SocketLink::SocketLink(int fd, int timeout_ms, std::shared_ptr<TranscriptSink> transcript)
    : fd_(fd), timeout_ms_(timeout_ms), transcript_(std::move(transcript)) {}

SocketLink::~SocketLink() {
    if (fd_ >= 0) ::close(fd_);
}

std::string SocketLink::transact(const std::string& line) {
    std::lock_guard<std::mutex> lock(mu_);
    if (transcript_) transcript_->write(line);
    write_all(fd_, line);
    auto reply = read_line(fd_, buffer_, timeout_ms_);
    if (!reply) throw Error("client connection closed");
    if (transcript_) transcript_->write(*reply);
    return *reply;
}

ClientResponse parse_response(const Envelope& env) {
    if (env.type != MsgType::RetrieveResponse)
        throw WireError("expected RetrieveResponse, got " + std::string(msg_type_name(env.type)));
    ClientResponse out;
    try {
        out.client_id = env.payload.at("client_id").get<std::string>();
        out.modality = env.payload.at("modality").get<std::string>();
        for (const auto& r : env.payload.at("results")) {
            ResultEntry entry;
            entry.uid_hash = r.at("uid_hash").get<std::string>();
            entry.score = r.at("score").get<double>();
            entry.summary_text = r.at("summary_text").get<std::string>();
            if (r.contains("signals"))
                for (auto it = r["signals"].begin(); it != r["signals"].end(); ++it)
                    entry.signals[it.key()] = it.value().get<double>();
            out.results.push_back(std::move(entry));
        }
    } catch (const nlohmann::json::exception& e) {
        throw WireError(std::string("malformed RetrieveResponse payload: ") + e.what());
    }
    return out;
}

nlohmann::ordered_json GlobalReport::to_json() const {
    nlohmann::ordered_json j;
    j["query_id"] = query_id;
    nlohmann::ordered_json clients = nlohmann::ordered_json::array();
    for (const auto& s : sections) {
        nlohmann::ordered_json sec;
        sec["client_id"] = s.client_id;
        sec["modality"] = s.modality;
        sec["failed"] = s.failed;
        sec["error"] = s.error;
        nlohmann::ordered_json results = nlohmann::ordered_json::array();
        for (const auto& r : s.results) {
            nlohmann::ordered_json e;
            e["uid_hash"] = r.uid_hash;
            e["score"] = r.score;
            e["summary_text"] = r.summary_text;
            nlohmann::ordered_json signals = nlohmann::ordered_json::object();
            for (const auto& [name, value] : r.signals) signals[name] = value;
            e["signals"] = std::move(signals);
            results.push_back(std::move(e));
        }
        sec["results"] = std::move(results);
        clients.push_back(std::move(sec));
    }
    j["clients"] = std::move(clients);
    nlohmann::ordered_json fused_json = nlohmann::ordered_json::array();
    for (const auto& f : fused) {
        nlohmann::ordered_json e;
        e["uid_hash"] = f.uid_hash;
        e["client_id"] = f.client_id;
        e["fused_score"] = f.fused_score;
        e["summary_text"] = f.summary_text;
        fused_json.push_back(std::move(e));
    }
    j["fused"] = std::move(fused_json);
    j["generation"] = generation;
    return j;
}

GlobalReport GlobalReport::from_json(const nlohmann::ordered_json& j) {
    GlobalReport report;
    try {
        report.query_id = j.at("query_id").get<std::string>();
        for (const auto& sec : j.at("clients")) {
            ClientSection s;
            s.client_id = sec.at("client_id").get<std::string>();
            s.modality = sec.at("modality").get<std::string>();
            s.failed = sec.at("failed").get<bool>();
            s.error = sec.at("error").get<std::string>();
            for (const auto& r : sec.at("results")) {
                ResultEntry entry;
                entry.uid_hash = r.at("uid_hash").get<std::string>();
                entry.score = r.at("score").get<double>();
                entry.summary_text = r.at("summary_text").get<std::string>();
                if (r.contains("signals"))
                    for (auto it = r["signals"].begin(); it != r["signals"].end(); ++it)
                        entry.signals[it.key()] = it.value().get<double>();
                s.results.push_back(std::move(entry));
            }
            report.sections.push_back(std::move(s));
        }
        for (const auto& f : j.at("fused")) {
            FusedEntry entry;
            entry.uid_hash = f.at("uid_hash").get<std::string>();
            entry.client_id = f.at("client_id").get<std::string>();
            entry.fused_score = f.at("fused_score").get<double>();
            entry.summary_text = f.at("summary_text").get<std::string>();
            report.fused.push_back(std::move(entry));
        }
        report.generation = j.at("generation").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw WireError(std::string("malformed GlobalReport payload: ") + e.what());
    }
    return report;
}

GlobalReport aggregate(const std::vector<ClientResponse>& responses,
                       const std::vector<FailedClient>& failures, size_t k_global,
                       const Generator& generator) {
    if (responses.empty()) throw Error("no clients responded");

    std::vector<ClientResponse> ordered = responses;
    std::sort(ordered.begin(), ordered.end(),
              [](const ClientResponse& a, const ClientResponse& b) {
                  return a.client_id < b.client_id;
              });

    GlobalReport report;
    std::vector<FusedEntry> pool;
    for (const auto& resp : ordered) {
        ClientSection section;
        section.client_id = resp.client_id;
        section.modality = resp.modality;
        section.results = resp.results;
        report.sections.push_back(std::move(section));

        if (resp.results.empty()) continue;
        double lo = resp.results.front().score;
        double hi = lo;
        for (const auto& r : resp.results) {
            lo = std::min(lo, r.score);
            hi = std::max(hi, r.score);
        }
        for (const auto& r : resp.results) {
            FusedEntry entry;
            entry.uid_hash = r.uid_hash;
            entry.client_id = resp.client_id;
            entry.fused_score = (hi > lo) ? (r.score - lo) / (hi - lo) : 1.0;
            entry.summary_text = r.summary_text;
            pool.push_back(std::move(entry));
        }
    }
    for (const auto& f : failures) {
        ClientSection section;
        section.client_id = f.client_id;
        section.failed = true;
        section.error = f.error;
        report.sections.push_back(std::move(section));
    }
    std::sort(report.sections.begin(), report.sections.end(),
              [](const ClientSection& a, const ClientSection& b) {
                  return a.client_id < b.client_id;
              });

    std::sort(pool.begin(), pool.end(), [](const FusedEntry& a, const FusedEntry& b) {
        if (a.fused_score != b.fused_score) return a.fused_score > b.fused_score;
        if (a.client_id != b.client_id) return a.client_id < b.client_id;
        return a.uid_hash < b.uid_hash;
    });
    if (pool.size() > k_global) pool.resize(k_global);
    report.fused = std::move(pool);

    if (generator) {
        report.generation = generator(report.fused);
    } else {
        std::string text;
        for (const auto& entry : report.fused)
            text += "[" + entry.client_id + "] " + entry.summary_text + "\n";
        report.generation = text;
    }
    return report;
}

Envelope make_retrieve_request(const Query& query, size_t top_k, const std::string& query_id,
                               std::optional<double> alpha, std::optional<double> tau) {
    Envelope env;
    env.type = MsgType::RetrieveRequest;
    env.query_id = query_id;
    env.payload["title"] = query.title;
    env.payload["abstract"] = query.abstract_text;
    env.payload["top_k"] = top_k;
    if (alpha) env.payload["alpha"] = *alpha;
    if (tau) env.payload["tau"] = *tau;
    return env;
}

std::string FederationServer::handle_register(const std::string& line,
                                              std::shared_ptr<ClientLink> link) {
    auto error_reply = [](const std::string& query_id, const std::string& message) {
        Envelope env;
        env.type = MsgType::Error;
        env.query_id = query_id;
        env.payload["message"] = message;
        return encode(env);
    };
    Envelope request;
    try {
        request = decode_line(line);
    } catch (const WireError& e) {
        return error_reply("", e.what());
    }
    if (request.type != MsgType::Register)
        return error_reply(request.query_id, "expected Register, got " +
                                                 std::string(msg_type_name(request.type)));
    std::string client_id;
    std::string modality;
    try {
        client_id = request.payload.at("client_id").get<std::string>();
        modality = request.payload.at("modality").get<std::string>();
        parse_modality(modality);
    } catch (const std::exception& e) {
        return error_reply(request.query_id, std::string("bad Register payload: ") + e.what());
    }
    if (client_id.empty()) return error_reply(request.query_id, "client_id must be non-empty");

    std::lock_guard<std::mutex> lock(mu_);
    for (const auto& [existing, unused] : roster_)
        if (existing == client_id)
            return error_reply(request.query_id, "duplicate client_id: " + client_id);
    roster_.emplace_back(client_id, std::move(link));

    Envelope ack;
    ack.type = MsgType::Ack;
    ack.query_id = request.query_id;
    ack.payload["client_id"] = client_id;
    ack.payload["modality"] = modality;
    return encode(ack);
}

size_t FederationServer::roster_size() const {
    std::lock_guard<std::mutex> lock(mu_);
    return roster_.size();
}

std::vector<std::string> FederationServer::roster() const {
    std::lock_guard<std::mutex> lock(mu_);
    std::vector<std::string> out;
    for (const auto& [client_id, link] : roster_) out.push_back(client_id);
    return out;
}

GlobalReport FederationServer::run_query(const Query& query, size_t top_k,
                                         const std::string& query_id) {
    std::vector<std::pair<std::string, std::shared_ptr<ClientLink>>> roster;
    {
        std::lock_guard<std::mutex> lock(mu_);
        roster = roster_;
    }
    const std::string request_line = encode(make_retrieve_request(query, top_k, query_id));

    std::vector<ClientResponse> responses;
    std::vector<FailedClient> failures;
    for (const auto& [client_id, link] : roster) {
        try {
            const Envelope reply = decode_line(link->transact(request_line));
            if (reply.type == MsgType::Error) {
                failures.push_back({client_id, reply.payload.value("message", "client error")});
                continue;
            }
            ClientResponse resp = parse_response(reply);
            if (resp.client_id != client_id) {
                failures.push_back({client_id, "response client_id mismatch"});
                continue;
            }
            responses.push_back(std::move(resp));
        } catch (const std::exception& e) {
            failures.push_back({client_id, e.what()});
        }
    }
    GlobalReport report = aggregate(responses, failures, params_.k_global);
    report.query_id = query_id;
    return report;
}

std::string FederationServer::handle_query_line(const std::string& line) {
    auto error_reply = [](const std::string& query_id, const std::string& message) {
        Envelope env;
        env.type = MsgType::Error;
        env.query_id = query_id;
        env.payload["message"] = message;
        return encode(env);
    };
    Envelope request;
    try {
        request = decode_line(line);
    } catch (const WireError& e) {
        return error_reply("", e.what());
    }
    if (request.type != MsgType::RetrieveRequest)
        return error_reply(request.query_id, "expected RetrieveRequest, got " +
                                                 std::string(msg_type_name(request.type)));
    try {
        Query query;
        query.title = request.payload.value("title", "");
        query.abstract_text = request.payload.value("abstract", "");
        const int64_t top_k = request.payload.value("top_k", int64_t{0});
        if (top_k < 1) return error_reply(request.query_id, "top_k must be >= 1");
        const GlobalReport report =
            run_query(query, static_cast<size_t>(top_k), request.query_id);
        Envelope reply;
        reply.type = MsgType::Ack;
        reply.query_id = request.query_id;
        reply.payload = report.to_json();
        return encode(reply);
    } catch (const std::exception& e) {
        return error_reply(request.query_id, e.what());
    }
}

Envelope connect_local(FederationServer& server, FederatedClient& client,
                       std::shared_ptr<TranscriptSink> transcript) {
    const std::string line = encode(client.make_register());
    if (transcript) transcript->write(line);
    auto link = std::make_shared<InProcessLink>(client, transcript);
    const std::string reply_line = server.handle_register(line, std::move(link));
    if (transcript) transcript->write(reply_line);
    const Envelope reply = decode_line(reply_line);
    if (reply.type == MsgType::Error)
        throw Error("registration rejected: " + reply.payload.value("message", ""));
    return reply;
}

TcpServer::TcpServer(FederationServer& core, std::string host, int port,
                     std::shared_ptr<TranscriptSink> transcript)
    : core_(core), host_(std::move(host)), port_(port), transcript_(std::move(transcript)) {}

TcpServer::~TcpServer() { stop(); }

void TcpServer::start() {
    listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listen_fd_ < 0) throw Error("cannot create listening socket");
    const int one = 1;
    ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    struct sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(static_cast<uint16_t>(port_));
    if (::inet_pton(AF_INET, host_.c_str(), &addr.sin_addr) != 1)
        throw Error("bad listen address " + host_);
    if (::bind(listen_fd_, reinterpret_cast<struct sockaddr*>(&addr), sizeof addr) != 0)
        throw Error("cannot bind " + host_ + ":" + std::to_string(port_));
    if (::listen(listen_fd_, 16) != 0) throw Error("cannot listen");
    socklen_t len = sizeof addr;
    ::getsockname(listen_fd_, reinterpret_cast<struct sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);
    running_ = true;
    accept_thread_ = std::thread([this] { accept_loop(); });
}

void TcpServer::stop() {
    if (!running_.exchange(false)) return;
    ::shutdown(listen_fd_, SHUT_RDWR);
    ::close(listen_fd_);
    listen_fd_ = -1;
    if (accept_thread_.joinable()) accept_thread_.join();
    std::lock_guard<std::mutex> lock(workers_mu_);
    for (auto& worker : workers_)
        if (worker.joinable()) worker.join();
    workers_.clear();
}

void TcpServer::accept_loop() {
    while (running_) {
        const int fd = ::accept(listen_fd_, nullptr, nullptr);
        if (fd < 0) {
            if (!running_) break;
            continue;
        }
        std::lock_guard<std::mutex> lock(workers_mu_);
        workers_.emplace_back([this, fd] { handle_connection(fd); });
    }
}

void TcpServer::handle_connection(int fd) {
    std::string buffer;
    try {
        auto line = read_line(fd, buffer, 60000);
        if (!line) {
            ::close(fd);
            return;
        }
        if (transcript_) transcript_->write(*line);
        MsgType type = MsgType::Error;
        try {
            type = decode_line(*line).type;
        } catch (const WireError&) {
            // keep Error; handled below with a proper reply
        }
        if (type == MsgType::Register) {
            // The registering connection becomes this client's link; the
            // link owns the fd from here on.
            auto link = std::make_shared<SocketLink>(fd, 30000, transcript_);
            const std::string reply = core_.handle_register(*line, link);
            if (transcript_) transcript_->write(reply);
            write_all(fd, reply);
            if (decode_line(reply).type == MsgType::Error) ::shutdown(fd, SHUT_RDWR);
            return;  // fd lifetime now managed by the link
        }
        const std::string reply = core_.handle_query_line(*line);
        if (transcript_) transcript_->write(reply);
        write_all(fd, reply);
    } catch (const std::exception& e) {
        HYFED_LOG_WARN("connection handler: %s", e.what());
    }
    ::close(fd);
}

void run_client_loop(FederatedClient& client, const std::string& host, int port, int timeout_ms) {
    const int fd = connect_tcp(host, port, timeout_ms);
    std::string buffer;
    try {
        write_all(fd, encode(client.make_register()));
        auto ack_line = read_line(fd, buffer, timeout_ms);
        if (!ack_line) throw Error("server closed during registration");
        const Envelope ack = decode_line(*ack_line);
        if (ack.type == MsgType::Error)
            throw Error("registration rejected: " + ack.payload.value("message", ""));
        while (true) {
            auto line = read_line(fd, buffer, -1);
            if (!line) break;  // server closed: orderly shutdown
            write_all(fd, encode(client.handle(decode_line(*line))));
        }
    } catch (...) {
        ::close(fd);
        throw;
    }
    ::close(fd);
}

GlobalReport query_server(const std::string& host, int port, const Query& query, size_t top_k,
                          const std::string& query_id, int timeout_ms) {
    const int fd = connect_tcp(host, port, timeout_ms);
    std::string buffer;
    Envelope reply;
    try {
        write_all(fd, encode(make_retrieve_request(query, top_k, query_id)));
        auto line = read_line(fd, buffer, timeout_ms);
        if (!line) throw Error("server closed before replying");
        reply = decode_line(*line);
    } catch (...) {
        ::close(fd);
        throw;
    }
    ::close(fd);
    if (reply.type == MsgType::Error)
        throw Error("query failed: " + reply.payload.value("message", ""));
    if (reply.type != MsgType::Ack)
        throw WireError("expected Ack, got " + std::string(msg_type_name(reply.type)));
    return GlobalReport::from_json(reply.payload);
}

}  // namespace hyfed
