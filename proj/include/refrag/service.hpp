// Copyright 2026 The refrag Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <memory>
#include <mutex>
#include <string>

#include <json.hpp>

#include "refrag/config.hpp"
#include "refrag/engine.hpp"

namespace httplib {
class Server;
}

namespace refrag {

struct HttpResponse {
    int status = 200;
    nlohmann::json body;
};

/// HTTP facade over an Engine. Routing lives in handle() so it can be
/// exercised without sockets; listen() wires it to cpp-httplib.
///
///   POST /v1/query        question + optional n, k, threshold, tie_epsilon, mode
///   POST /v1/match        sentences + chunk_ids | chunks[{id,text}] + options
///   GET  /v1/chunks/{id}  record with ver0/ver1 renderings
///   GET  /v1/health       503 until an engine is installed
///
/// Errors are `{"error": {"code": ..., "message": ...}}`.
class Service {
public:
    explicit Service(Config config);
    ~Service();

    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    /// Installs the engine (with its sealed store); health turns 200.
    void set_engine(std::shared_ptr<const Engine> engine);

    HttpResponse handle(const std::string& method, const std::string& path, const std::string& body) const;

    /// Binds `host:port` (port 0 picks a free one); returns the bound port.
    int bind(const std::string& listen);
    /// Serves until stop(). Call after bind().
    void run();
    void stop();

private:
    HttpResponse query(const std::string& body) const;
    HttpResponse match(const std::string& body) const;
    HttpResponse chunk(const std::string& id) const;
    HttpResponse health() const;

    std::shared_ptr<const Engine> engine() const;

    Config config_;
    mutable std::mutex mutex_;
    std::shared_ptr<const Engine> engine_;
    std::unique_ptr<httplib::Server> server_;
};

}  // namespace refrag
