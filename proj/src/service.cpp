// Copyright 2026 The refrag Authors
// SPDX-License-Identifier: Apache-2.0

#include "refrag/service.hpp"

#include <httplib.h>

#include "refrag/error.hpp"
#include "refrag/json_io.hpp"
#include "refrag/version.hpp"

namespace refrag {

namespace {

HttpResponse error_response(int status, const std::string& code, const std::string& message) {
    return {status, json{{"error", {{"code", code}, {"message", message}}}}};
}

HttpResponse from_error(const Error& e) {
    switch (e.kind()) {
        case ErrorKind::backend: {
            HttpResponse r = error_response(502, "backend_failure", e.what());
            if (const auto* be = dynamic_cast<const BackendError*>(&e)) r.body["error"]["backend"] = be->backend();
            return r;
        }
        case ErrorKind::data:
            return error_response(400, "invalid_data", e.what());
        case ErrorKind::usage:
        default:
            return error_response(400, "invalid_request", e.what());
    }
}

json parse_body(const std::string& body) {
    try {
        auto j = json::parse(body);
        if (!j.is_object()) throw UsageError("request body must be a JSON object");
        return j;
    } catch (const json::parse_error&) {
        throw UsageError("request body is not valid JSON");
    }
}

std::pair<std::string, int> split_listen(const std::string& listen) {
    const auto colon = listen.rfind(':');
    if (colon == std::string::npos) throw UsageError("listen address must be host:port");
    try {
        return {listen.substr(0, colon), std::stoi(listen.substr(colon + 1))};
    } catch (const std::exception&) {
        throw UsageError("listen address must be host:port");
    }
}

}  // namespace

Service::Service(Config config) : config_(std::move(config)) {}

Service::~Service() { stop(); }

void Service::set_engine(std::shared_ptr<const Engine> engine) {
    if (engine && !engine->has_store()) throw UsageError("engine has no corpus loaded");
    std::lock_guard lock(mutex_);
    engine_ = std::move(engine);
}

std::shared_ptr<const Engine> Service::engine() const {
    std::lock_guard lock(mutex_);
    return engine_;
}

HttpResponse Service::handle(const std::string& method, const std::string& path, const std::string& body) const {
    try {
        if (path == "/v1/health") {
            if (method != "GET") return error_response(405, "method_not_allowed", "use GET");
            return health();
        }
        const bool known = path == "/v1/query" || path == "/v1/match" || path.rfind("/v1/chunks/", 0) == 0;
        if (!known) return error_response(404, "not_found", "no route for " + path);
        if (!engine()) return error_response(503, "starting", "corpus is still loading");

        if (path == "/v1/query") {
            if (method != "POST") return error_response(405, "method_not_allowed", "use POST");
            return query(body);
        }
        if (path == "/v1/match") {
            if (method != "POST") return error_response(405, "method_not_allowed", "use POST");
            return match(body);
        }
        if (method != "GET") return error_response(405, "method_not_allowed", "use GET");
        return chunk(path.substr(std::string("/v1/chunks/").size()));
    } catch (const Error& e) {
        return from_error(e);
    } catch (const std::exception& e) {
        return error_response(500, "internal", e.what());
    }
}

HttpResponse Service::query(const std::string& body) const {
    const auto eng = engine();
    const auto req = parse_body(body);
    auto q = req.find("question");
    if (q == req.end() || !q->is_string() || text::trim(q->get<std::string>()).empty()) {
        return error_response(400, "empty_question", "question must be a non-empty string");
    }
    const auto opts = eng->options_from_json(req);
    const auto result = eng->query(q->get<std::string>(), opts);
    return {200, query_to_json(result, eng->store())};
}

HttpResponse Service::match(const std::string& body) const {
    const auto eng = engine();
    const auto req = parse_body(body);
    const auto sentences = require_string_list(req, "sentences", "request");
    if (sentences.empty()) return error_response(400, "invalid_request", "at least one sentence is required");

    auto opts = eng->options_from_json(req);
    std::vector<MatchChunk> chunks;
    if (auto inline_chunks = req.find("chunks"); inline_chunks != req.end()) {
        if (!inline_chunks->is_array()) return error_response(400, "invalid_request", "'chunks' must be an array");
        for (const auto& c : *inline_chunks) {
            if (!c.is_object()) return error_response(400, "invalid_request", "chunk entries must be objects");
            chunks.push_back({require_string(c, "id", "chunks"), require_string(c, "text", "chunks")});
        }
    } else {
        chunks = eng->resolve_chunks(require_string_list(req, "chunk_ids", "request"), opts.version);
    }
    if (chunks.empty()) return error_response(400, "invalid_request", "at least one chunk is required");
    if (sentences.size() * chunks.size() > config_.max_match_cells) {
        return error_response(413, "too_large",
                              std::to_string(sentences.size()) + " sentences x " + std::to_string(chunks.size()) +
                                  " chunks exceeds the limit of " + std::to_string(config_.max_match_cells));
    }
    return {200, to_json(eng->match(sentences, chunks, opts))};
}

HttpResponse Service::chunk(const std::string& id) const {
    const auto eng = engine();
    const Chunk* c = eng->store().find(id);
    if (!c) return error_response(404, "not_found", "unknown chunk id \"" + id + "\"");
    return {200, json{{"chunk", to_json(*c)},
                      {"ver0", render_chunk_text(*c, TextVersion::ver0)},
                      {"ver1", render_chunk_text(*c, TextVersion::ver1)}}};
}

HttpResponse Service::health() const {
    const auto eng = engine();
    if (!eng) return error_response(503, "starting", "corpus is still loading");
    return {200, json{{"status", "ok"},
                      {"version", kVersion},
                      {"corpus_size", eng->store().size()},
                      {"backends",
                       {{"retrieval", eng->retrieval_scorer().identity()},
                        {"rerank", eng->rerank_scorer().identity()},
                        {"generator", eng->generator().identity()}}},
                      {"defaults", eng->config().summary()}}};
}

int Service::bind(const std::string& listen) {
    const auto [host, port] = split_listen(listen);
    server_ = std::make_unique<httplib::Server>();
    const std::string origin = config_.cors_origin;

    auto dispatch = [this, origin](const httplib::Request& req, httplib::Response& res) {
        const auto out = handle(req.method, req.path, req.body);
        res.status = out.status;
        res.set_header("Access-Control-Allow-Origin", origin);
        res.set_content(out.body.dump(), "application/json");
    };
    server_->Get(R"(/v1/.*)", dispatch);
    server_->Post(R"(/v1/.*)", dispatch);
    server_->Options(R"(/v1/.*)", [origin](const httplib::Request&, httplib::Response& res) {
        res.status = 204;
        res.set_header("Access-Control-Allow-Origin", origin);
        res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
        res.set_header("Access-Control-Allow-Headers", "Content-Type");
    });

    const int bound = port == 0 ? server_->bind_to_any_port(host) : (server_->bind_to_port(host, port) ? port : -1);
    if (bound < 0) throw UsageError("cannot listen on " + listen);
    return bound;
}

void Service::run() {
    if (!server_) throw UsageError("Service::run called before bind");
    server_->listen_after_bind();
}

void Service::stop() {
    if (server_) server_->stop();
}

}  // namespace refrag
